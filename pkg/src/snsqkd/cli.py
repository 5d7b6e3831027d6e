"""Batch command-line tool.

Subcommands: scan (distance sweeps to CSV), point (full breakdown at one
distance), optimize (best protocol parameters at one distance), plob
(repeaterless bound), mc-verify (Monte Carlo oracle z-report), qubit-check
(pair-state inequality certificate).

Configuration comes from a flat key=value text file plus flag overrides;
every command is deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import mcsim, qubitmodel
from .channel import ExperimentParams, ProtocolParams, arm_transmittance
from .decoy import UntaggedStats
from .optimizer import OptimizationSpec, optimize
from .pipeline import VARIANTS, PointResult, evaluate, mode_for_variant
from .postproc import ZWindowCounts
from .presets import PRESETS, preset

__all__ = ["RunConfig", "ConfigError", "plob_rate", "main", "console_main"]

_EXPERIMENT_KEYS = (
    "dark_count",
    "detector_eff",
    "error_correction_f",
    "misalignment",
    "fiber_loss_db_km",
    "total_pulses",
    "failure_prob",
)
_PROTOCOL_KEYS = ("p_z", "p_send", "mu_z", "mu1", "mu2", "delta")


class ConfigError(ValueError):
    """Invalid run configuration; the message carries field/line diagnostics."""


@dataclass
class RunConfig:
    """Resolved inputs of one command run."""

    preset: str | None = None
    experiment: dict[str, float] = field(default_factory=dict)
    protocol: dict[str, float] = field(default_factory=dict)
    variants: list[str] = field(default_factory=list)
    mode: str | None = None
    distance: float | None = None
    range_spec: tuple[float, float, float] | None = None
    seed: int = 0
    out: str | None = None
    bits: int = 1_000_000
    n_seeds: int = 1
    grid_points: int = 100
    jobs: int = 1
    vacuum_credit: bool = False
    convention: str = "visibility"
    inject_fault: bool = False

    def build_experiment(self, distance_km: float) -> ExperimentParams:
        if self.preset is not None:
            if self.preset not in PRESETS:
                raise ConfigError(f"field 'preset': unknown preset {self.preset!r}")
            base = dataclasses.asdict(PRESETS[self.preset])
        else:
            base = {}
        base.update(self.experiment)
        base["distance_km"] = distance_km
        missing = [key for key in _EXPERIMENT_KEYS if key not in base]
        if missing:
            raise ConfigError(f"missing experiment fields {missing}; give a preset or set them")
        try:
            return ExperimentParams(**{k: base[k] for k in _EXPERIMENT_KEYS + ("distance_km",)})
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def fixed_protocol(self) -> ProtocolParams | None:
        """Protocol from config when fully specified; None means optimize."""
        if "p_send" not in self.protocol or "mu_z" not in self.protocol:
            return None
        kwargs = dict(self.protocol)
        mu1 = kwargs.pop("mu1", 0.02)
        mu2 = kwargs.pop("mu2", 0.06)
        kwargs.setdefault("p_z", 1.0)
        try:
            return ProtocolParams(decoy_intensities=(0.0, mu1, mu2), **kwargs)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"invalid protocol parameters: {err}") from err

    def validate_variants(self) -> None:
        if not self.variants:
            raise ConfigError("field 'variant': at least one pipeline variant is required")
        for name in self.variants:
            if name not in VARIANTS:
                raise ConfigError(f"field 'variant': unknown variant {name!r}; choose from {VARIANTS}")
            if self.mode is not None and mode_for_variant(name) != self.mode:
                raise ConfigError(
                    f"field 'mode': variant {name!r} runs in {mode_for_variant(name)!r} mode, "
                    f"config requests {self.mode!r}"
                )


_BOOL_KEYS = {"vacuum_credit", "inject_fault"}
_INT_KEYS = {"seed", "bits", "n_seeds", "grid_points", "jobs"}
_STR_KEYS = {"preset", "mode", "out", "convention"}


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Flat key=value file; '#' starts a comment, blank lines are skipped."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            values[key] = _convert_config_value(key, value)
        except ConfigError as err:
            raise ConfigError(f"{path}:{lineno}: {err}") from None
    return values


def _convert_config_value(key: str, value: str) -> object:
    if key in _BOOL_KEYS:
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"field {key!r}: expected a boolean, got {value!r}")
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"field {key!r}: expected an integer, got {value!r}") from None
    if key in _STR_KEYS:
        return value
    if key == "variant":
        return [v.strip() for v in value.split(",") if v.strip()]
    if key == "range":
        return _parse_range(value)
    if key == "distance":
        return float(value)
    if key in _EXPERIMENT_KEYS or key in _PROTOCOL_KEYS:
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"field {key!r}: expected a number, got {value!r}") from None
    raise ConfigError(f"unknown configuration key {key!r}")


def _parse_range(value: str) -> tuple[float, float, float]:
    parts = value.split(":")
    if len(parts) != 3:
        raise ConfigError(f"field 'range': expected 'lo:hi:step', got {value!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0.0:
        raise ConfigError(f"field 'range': step must be positive, got {step!r}")
    if hi < lo:
        raise ConfigError(f"field 'range': empty range {value!r}")
    return lo, hi, step


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config file, then command-line flags."""
    cfg = RunConfig()
    merged: dict[str, object] = {}
    if getattr(args, "config", None):
        merged.update(parse_config_file(args.config))
    for key in (
        "preset seed out bits n_seeds grid_points jobs mode convention "
        "vacuum_credit inject_fault distance".split()
    ):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "range", None) is not None:
        merged["range"] = _parse_range(args.range)
    if getattr(args, "variant", None):
        merged["variant"] = [v.strip() for part in args.variant for v in part.split(",") if v.strip()]
    for key, value in merged.items():
        if key in _EXPERIMENT_KEYS:
            cfg.experiment[key] = float(value)  # type: ignore[arg-type]
        elif key in _PROTOCOL_KEYS:
            cfg.protocol[key] = float(value)  # type: ignore[arg-type]
        elif key == "variant":
            cfg.variants = list(value)  # type: ignore[arg-type]
        elif key == "range":
            cfg.range_spec = value  # type: ignore[assignment]
        else:
            setattr(cfg, key, value)
    return cfg


def plob_rate(fiber_loss_db_km: float, distance_km: float, eta_detector: float = 1.0) -> float:
    """Repeaterless secret-key capacity -log2(1 - eta) of the lossy channel.

    eta_detector=1 gives the absolute limit; a detector efficiency below one
    gives the relative limit.  Returns inf at zero total loss.
    """
    eta = eta_detector * 10.0 ** (-fiber_loss_db_km * distance_km / 10.0)
    if eta >= 1.0:
        return math.inf
    return -math.log2(1.0 - eta)


def _optimization_spec(cfg: RunConfig, variant: str) -> OptimizationSpec:
    return OptimizationSpec(
        variant=variant,
        seed=cfg.seed,
        vacuum_credit=cfg.vacuum_credit,
        convention=cfg.convention,
    )


def _protocol_for(cfg: RunConfig, exp: ExperimentParams, variant: str) -> ProtocolParams:
    fixed = cfg.fixed_protocol()
    if fixed is not None:
        return fixed
    return optimize(_optimization_spec(cfg, variant), exp).params


_PROTO_COLUMNS = ("p_z", "p_send", "mu_z", "mu1", "mu2", "delta")


def _scan_row(cfg: RunConfig, distance: float) -> dict[str, float]:
    row: dict[str, float] = {"distance_km": distance}
    exp = cfg.build_experiment(distance)
    for variant in cfg.variants:
        proto = _protocol_for(cfg, exp, variant)
        point = evaluate(exp, proto, variant, cfg.vacuum_credit, cfg.convention)
        row[f"{variant}_rate"] = point.key.rate
        for name in _PROTO_COLUMNS:
            row[f"{variant}_{name}"] = getattr(proto, name)
    row["plob_absolute"] = plob_rate(exp.fiber_loss_db_km, distance, 1.0)
    row["plob_relative"] = plob_rate(exp.fiber_loss_db_km, distance, exp.detector_eff)
    return row


def _config_header(cfg: RunConfig, columns: list[str]) -> list[str]:
    lines = ["# key-rate scan"]
    resolved = {
        "preset": cfg.preset,
        "variants": ",".join(cfg.variants),
        "mode": cfg.mode,
        "seed": cfg.seed,
        "rng": mcsim.RNG_ALGORITHM,
        "convention": cfg.convention,
        "vacuum_credit": cfg.vacuum_credit,
        "range": cfg.range_spec,
        **{f"experiment.{k}": v for k, v in sorted(cfg.experiment.items())},
        **{f"protocol.{k}": v for k, v in sorted(cfg.protocol.items())},
    }
    lines += [f"# {key} = {value}" for key, value in resolved.items()]
    lines.append("# rates are bits per pulse; *_hex columns carry the exact binary value")
    lines.append("# columns: " + ",".join(columns))
    return lines


def _format_cell(name: str, value: float) -> str:
    if name.endswith("_hex"):
        return value
    if name == "distance_km":
        return f"{value:g}"
    if math.isinf(value):
        return "unbounded"
    return f"{value:.6e}"


def cmd_scan(cfg: RunConfig) -> int:
    cfg.validate_variants()
    if cfg.range_spec is None:
        raise ConfigError("field 'range': scan requires a distance range lo:hi:step")
    lo, hi, step = cfg.range_spec
    distances = []
    d = lo
    while d <= hi + 1e-9:
        distances.append(round(d, 9))
        d += step
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_scan_row, [cfg] * len(distances), distances))
    else:
        rows = [_scan_row(cfg, d) for d in distances]

    columns: list[str] = ["distance_km"]
    for variant in cfg.variants:
        columns += [f"{variant}_rate", f"{variant}_rate_hex"]
        columns += [f"{variant}_{name}" for name in _PROTO_COLUMNS]
    columns += ["plob_absolute", "plob_absolute_hex", "plob_relative", "plob_relative_hex"]

    lines = _config_header(cfg, columns)
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for name in columns:
            if name.endswith("_hex"):
                cells.append(float(row[name[: -len("_hex")]]).hex())
            else:
                cells.append(_format_cell(name, row[name]))
        lines.append(",".join(cells))
    _write_output(cfg.out, "\n".join(lines) + "\n")
    return 0


def _breakdown_lines(point: PointResult, exp: ExperimentParams, proto: ProtocolParams) -> list[str]:
    lines = [
        f"variant             {point.variant} ({point.mode})",
        f"distance_km         {exp.distance_km:g}",
        f"arm_transmittance   {arm_transmittance(exp)!r}",
        f"protocol            p_z={proto.p_z!r} p_send={proto.p_send!r} mu_z={proto.mu_z!r}",
        f"decoys              mu1={proto.mu1!r} mu2={proto.mu2!r} delta={proto.delta!r}",
        "",
        f"q_nn                {point.rates.q_nn!r}",
        f"q_one_sender        {point.rates.q_c!r}",
        f"q_both_send         {point.rates.q_dd!r}",
        f"single_photon_yield {point.rates.y1!r}",
        f"single_photon_error {point.rates.e1_raw!r}",
        "",
        f"n_c0={point.counts.n_c0!r} n_c1={point.counts.n_c1!r}",
        f"n_d={point.counts.n_d!r} n_v={point.counts.n_v!r}",
        f"n_t={point.counts.n_t!r}",
        f"bit_groups          N0={point.counts.n_group0!r} N1={point.counts.n_group1!r}",
        f"error_rates         E0={point.counts.e_group0!r} E1={point.counts.e_group1!r} EZ={point.counts.e_z!r}",
        "",
        f"untagged            n1={point.untagged.n1!r} (n1_0={point.untagged.n1_0!r}, n1_1={point.untagged.n1_1!r})",
        f"untagged_vacuum     n0={point.untagged.n0!r}",
        f"phase_error_bound   {point.untagged.e1ph!r}",
    ]
    if point.bfer is not None:
        b = point.bfer
        lines += [
            "",
            f"bfer_survivors      {b.n_survived!r}",
            f"bfer_classes        n_t1={b.n_t1!r} n_t2={b.n_t2!r} n_t3={b.n_t3!r}",
            f"bfer_class_errors   E1={b.e1!r} E2={b.e2!r} E3={b.e3!r}",
            f"bfer_untagged       {b.n1_survived!r} (iterated phase error {b.e1ph_iter!r})",
        ]
    if point.budget is not None:
        budget = point.budget
        lines += [
            "",
            f"epsilon_cor         {budget.eps_cor!r}",
            f"epsilon_hat         {budget.eps_hat!r}",
            f"epsilon_pa          {budget.eps_pa!r}",
            f"epsilon_bar         {budget.eps_bar!r}",
            f"epsilon_n1          {budget.eps_n1!r}",
            f"epsilon_sec         {budget.eps_sec!r}",
            f"epsilon_total       {budget.eps_tot!r}",
        ]
    key = point.key
    lines += [
        "",
        f"untagged_term       {key.untagged_term!r}",
        f"phase_term          {key.phase_term!r}",
        f"ec_term             {key.ec_term!r}",
        f"finite_penalty      {key.finite_penalty!r}",
        f"key_length          {key.key_length!r}",
        f"rate_per_pulse      {key.rate:.6e} ({key.rate.hex()})",
    ]
    return lines


def cmd_point(cfg: RunConfig) -> int:
    cfg.validate_variants()
    if cfg.distance is None:
        raise ConfigError("field 'distance': point requires a distance")
    exp = cfg.build_experiment(cfg.distance)
    chunks = []
    for variant in cfg.variants:
        proto = _protocol_for(cfg, exp, variant)
        point = evaluate(exp, proto, variant, cfg.vacuum_credit, cfg.convention)
        chunks.append("\n".join(_breakdown_lines(point, exp, proto)))
    _write_output(cfg.out, "\n\n".join(chunks) + "\n")
    return 0


def cmd_optimize(cfg: RunConfig) -> int:
    cfg.validate_variants()
    if cfg.distance is None:
        raise ConfigError("field 'distance': optimize requires a distance")
    exp = cfg.build_experiment(cfg.distance)
    lines = []
    for variant in cfg.variants:
        result = optimize(_optimization_spec(cfg, variant), exp)
        proto = result.params
        lines += [
            f"variant {variant}: rate {result.rate:.6e} ({result.rate.hex()})",
            f"  p_z={proto.p_z!r} p_send={proto.p_send!r} mu_z={proto.mu_z!r}",
            f"  mu1={proto.mu1!r} mu2={proto.mu2!r} delta={proto.delta!r}",
            f"  evaluations {result.evaluations}, restarts {len(result.restarts)}:",
        ]
        lines += [
            f"    start {r.start_value:.6e} -> final {r.final_value:.6e} ({r.evaluations} evals)"
            for r in result.restarts
        ]
    _write_output(cfg.out, "\n".join(lines) + "\n")
    return 0


def cmd_plob(cfg: RunConfig, setting: str) -> int:
    if cfg.distance is None:
        raise ConfigError("field 'distance': plob requires a distance")
    exp = cfg.build_experiment(cfg.distance)
    eta_det = 1.0 if setting == "absolute" else exp.detector_eff
    rate = plob_rate(exp.fiber_loss_db_km, cfg.distance, eta_det)
    if math.isinf(rate):
        _write_output(cfg.out, "unbounded\n")
    else:
        _write_output(cfg.out, f"{rate:.6e} ({rate.hex()})\n")
    return 0


def _mc_fixture(cfg: RunConfig) -> tuple[ZWindowCounts, UntaggedStats]:
    """Counts/untagged instance rescaled to the requested string length."""
    distance = cfg.distance if cfg.distance is not None else 100.0
    exp = cfg.build_experiment(distance)
    variant = cfg.variants[0] if cfg.variants else "bfer"
    proto = _protocol_for(cfg, exp, variant)
    point = evaluate(exp, proto, variant if variant != "finite" else "bfer",
                     cfg.vacuum_credit, cfg.convention)
    factor = cfg.bits / point.counts.n_t
    return point.counts.scaled(factor), point.untagged.scaled(factor)


def cmd_mc_verify(cfg: RunConfig) -> int:
    counts, untagged = _mc_fixture(cfg)
    analytic = mcsim.expected_statistics(counts, untagged, cfg.bits)
    if cfg.inject_fault:
        # deliberately shift every expectation by ten sigmas (self-test hook)
        analytic = {k: (m + 10.0 * s, s) for k, (m, s) in analytic.items()}
    lines = [
        "# statistic,analytic,empirical,sigma,z",
        f"# rng = {mcsim.RNG_ALGORITHM}, bits = {cfg.bits}, seeds = {cfg.n_seeds}, base_seed = {cfg.seed}",
    ]
    flagged = 0
    for offset in range(cfg.n_seeds):
        seed = cfg.seed + offset
        s = mcsim.sample_string(counts, untagged, seed)
        bfer = mcsim.run_bfer(s, seed + 1_000_003)
        aopp_run = mcsim.run_aopp(s, seed + 2_000_003)
        rows = mcsim.compare(mcsim.empirical_statistics(bfer, aopp_run), analytic)
        for row in rows:
            flagged += row.flagged
            lines.append(
                f"{row.name},{row.analytic:.6e},{row.empirical:.6e},{row.sigma:.6e},{row.z:+.3f}"
                + (",FLAG" if row.flagged else "")
            )
    lines.append(f"# flagged = {flagged}")
    _write_output(cfg.out, "\n".join(lines) + "\n")
    return 1 if flagged else 0


def cmd_qubit_check(cfg: RunConfig) -> int:
    n = cfg.grid_points
    report = qubitmodel.verify_iteration_inequality(n, n, n, matrix_stride=max(1, n // 10))
    lines = [
        f"grid_points          {report.grid_points}",
        f"max_violation        {report.max_violation!r}",
        f"matrix_checks        {report.matrix_checks}",
        f"max_matrix_mismatch  {report.max_matrix_mismatch!r}",
        f"beta_sweeps          {report.beta_sweeps}",
        f"max_beta_spread      {report.max_beta_spread!r}",
        f"passed               {report.passed}",
    ]
    _write_output(cfg.out, "\n".join(lines) + "\n")
    return 0 if report.passed else 1


def _write_output(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--preset", help=f"device preset, one of {sorted(PRESETS)}")
    parser.add_argument("--seed", type=int, help="base seed recorded in outputs")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--mode", choices=("asymptotic", "finite"))
    parser.add_argument("--variant", action="append", help="pipeline variant(s), comma-separable")
    parser.add_argument("--distance", type=float, help="distance in km")
    parser.add_argument("--range", dest="range", help="distance range lo:hi:step in km")
    parser.add_argument("--jobs", type=int, help="parallel distance evaluations")
    parser.add_argument("--convention", choices=("visibility", "mixing"))
    parser.add_argument("--vacuum-credit", dest="vacuum_credit", action="store_const", const=True)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="snsqkd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("scan", "point", "optimize"):
        p = sub.add_parser(name)
        _add_common(p)

    p = sub.add_parser("plob")
    _add_common(p)
    p.add_argument("--eta-setting", choices=("absolute", "relative"), default="absolute")

    p = sub.add_parser("mc-verify")
    _add_common(p)
    p.add_argument("--bits", type=int, help="sampled string length")
    p.add_argument("--n-seeds", dest="n_seeds", type=int, help="number of seeds to run")
    p.add_argument("--inject-fault", dest="inject_fault", action="store_const", const=True)

    p = sub.add_parser("qubit-check")
    _add_common(p)
    p.add_argument("--grid-points", dest="grid_points", type=int, help="grid size per axis")

    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "point":
            return cmd_point(cfg)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        if args.command == "plob":
            return cmd_plob(cfg, args.eta_setting)
        if args.command == "mc-verify":
            return cmd_mc_verify(cfg)
        return cmd_qubit_check(cfg)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2


def console_main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
