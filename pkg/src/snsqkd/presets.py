"""Named device-parameter presets used throughout the tests and the CLI.

Rows A-F are the standard simulation settings (fiber loss 0.2 dB/km); rows
C-F target asymptotic rates, where the pulse count only normalizes the rate,
so they carry a nominal 1e12.  The ``table2`` preset is the 502 km
finite-size comparison setting.
"""

from __future__ import annotations

from .channel import ExperimentParams

__all__ = ["PRESETS", "preset"]

PRESETS: dict[str, ExperimentParams] = {
    "rowA": ExperimentParams(
        dark_count=1e-8,
        detector_eff=0.30,
        error_correction_f=1.10,
        misalignment=0.03,
        fiber_loss_db_km=0.2,
        total_pulses=1e11,
        failure_prob=1e-10,
    ),
    "rowB": ExperimentParams(
        dark_count=1e-8,
        detector_eff=0.30,
        error_correction_f=1.10,
        misalignment=0.03,
        fiber_loss_db_km=0.2,
        total_pulses=1e12,
        failure_prob=1e-10,
    ),
    "rowC": ExperimentParams(
        dark_count=1e-8,
        detector_eff=0.50,
        error_correction_f=1.15,
        misalignment=0.05,
        fiber_loss_db_km=0.2,
        total_pulses=1e12,
        failure_prob=1e-10,
    ),
    "rowD": ExperimentParams(
        dark_count=8e-8,
        detector_eff=0.30,
        error_correction_f=1.15,
        misalignment=0.05,
        fiber_loss_db_km=0.2,
        total_pulses=1e12,
        failure_prob=1e-10,
    ),
    "rowE": ExperimentParams(
        dark_count=8e-8,
        detector_eff=0.30,
        error_correction_f=1.15,
        misalignment=0.10,
        fiber_loss_db_km=0.2,
        total_pulses=1e12,
        failure_prob=1e-10,
    ),
    "rowF": ExperimentParams(
        dark_count=8e-8,
        detector_eff=0.30,
        error_correction_f=1.15,
        misalignment=0.15,
        fiber_loss_db_km=0.2,
        total_pulses=1e12,
        failure_prob=1e-10,
    ),
    "table2": ExperimentParams(
        dark_count=1.26e-8,
        detector_eff=0.29,
        error_correction_f=1.10,
        misalignment=0.098,
        fiber_loss_db_km=0.162,
        total_pulses=2.0e13,
        failure_prob=1.71e-10,
    ),
}


def preset(name: str, distance_km: float = 0.0) -> ExperimentParams:
    """Look up a preset, optionally placing it at a distance."""
    try:
        base = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return base.at_distance(distance_km)
