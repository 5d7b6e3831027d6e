"""Monte Carlo oracle for the pairing formulas.

Samples labeled bit strings with the same composition as an expected-count
instance, runs the literal post-processing procedures (random pairing with
parity comparison, odd-parity sifting, actively odd-parity pairing), and
compares every tallied statistic against its analytic expectation via
binomial z-scores.

All randomness comes from a single seeded PCG64 stream per run so results
are reproducible; the algorithm identifier is recorded in emitted reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .decoy import UntaggedStats
from .postproc import ZWindowCounts

__all__ = [
    "RNG_ALGORITHM",
    "LabeledString",
    "BferEmpirical",
    "AoppEmpirical",
    "StatCheck",
    "sample_string",
    "run_bfer",
    "run_aopp",
    "expected_statistics",
    "empirical_statistics",
    "compare",
]

RNG_ALGORITHM = "numpy-pcg64"

# Label codes and the bit a label implies on each side.  One-sender events
# agree on the bit; both-send (D) and neither-send (V) events are the
# bit-flip errors.
C0, C1, D, V = 0, 1, 2, 3
_LABEL_NAMES = ("c0", "c1", "d", "v")
ALICE_BITS = np.array([0, 1, 1, 0], dtype=np.uint8)
BOB_BITS = np.array([0, 1, 0, 1], dtype=np.uint8)


@dataclass(frozen=True)
class LabeledString:
    """Sampled effective-window string: per-position label and untagged flag."""

    labels: np.ndarray
    untagged: np.ndarray

    @property
    def n_t(self) -> int:
        return self.labels.size

    @property
    def alice_bits(self) -> np.ndarray:
        return ALICE_BITS[self.labels]

    @property
    def bob_bits(self) -> np.ndarray:
        return BOB_BITS[self.labels]


@dataclass(frozen=True)
class BferEmpirical:
    """Tally of one random-pairing error-rejection run."""

    n_pairs: int
    leftover: int
    pair_counts: dict[str, int]        # the nine ordered label pairs
    cc_counts: dict[str, int]          # c1c1, c1c0, c0c1, c0c0
    n_survived: int
    n_t1: int
    n_t2: int
    n_t3: int
    err1: int
    err2: int
    err3: int
    n1_survived: int
    n_r: int                           # odd-parity pairs, before the parity comparison


@dataclass(frozen=True)
class AoppEmpirical:
    """Tally of one actively-odd-parity-pairing run."""

    method: str
    n_a: int
    n_both_c: int
    n_vd_dv: int
    n_kept: int
    n_discarded: int
    errors_kept: int
    n1_kept: int


def sample_string(counts: ZWindowCounts, untagged: UntaggedStats, seed: int) -> LabeledString:
    """Multinomial sample of labels with the instance's proportions.

    Untagged flags are assigned uniformly within the one-sender labels at
    rates n1_0/n_c0 and n1_1/n_c1.
    """
    if untagged.n1_0 > counts.n_c0 or untagged.n1_1 > counts.n_c1:
        raise ValueError("untagged counts exceed the one-sender event counts")
    n = int(round(counts.n_t))
    if n < 2:
        raise ValueError("need at least two positions to sample")
    probs = np.array([counts.n_c0, counts.n_c1, counts.n_d, counts.n_v]) / counts.n_t
    rng = np.random.default_rng(seed)
    edges = np.cumsum(probs)
    edges[-1] = 1.0  # guard against cumulative rounding below 1
    labels = np.searchsorted(edges, rng.random(n), side="right").astype(np.int8)
    u = rng.random(n)
    rate_c0 = untagged.n1_0 / counts.n_c0 if counts.n_c0 > 0.0 else 0.0
    rate_c1 = untagged.n1_1 / counts.n_c1 if counts.n_c1 > 0.0 else 0.0
    flags = ((labels == C0) & (u < rate_c0)) | ((labels == C1) & (u < rate_c1))
    return LabeledString(labels=labels, untagged=flags)


def run_bfer(s: LabeledString, seed: int) -> BferEmpirical:
    """Literal random pairing, parity comparison, keep-first-on-match."""
    n = s.n_t
    if n < 2:
        raise ValueError("need at least two bits to pair")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_pairs = n // 2
    first = order[: 2 * n_pairs : 2]
    second = order[1 : 2 * n_pairs : 2]

    lab1 = s.labels[first]
    lab2 = s.labels[second]
    alice = s.alice_bits
    bob = s.bob_bits
    keep = (alice[first] ^ alice[second]) == (bob[first] ^ bob[second])

    merged1 = np.where(lab1 <= C1, 0, lab1 - 1)  # c -> 0, d -> 1, v -> 2
    merged2 = np.where(lab2 <= C1, 0, lab2 - 1)
    pair_hist = np.bincount(merged1 * 3 + merged2, minlength=9)
    order3 = ("c", "d", "v")
    pair_counts = {
        f"{order3[i]}{order3[j]}": int(pair_hist[3 * i + j]) for i in range(3) for j in range(3)
    }
    cc_mask = (lab1 <= C1) & (lab2 <= C1)
    cc_hist = np.bincount(lab1[cc_mask] * 2 + lab2[cc_mask], minlength=4)
    cc_counts = {
        "c0c0": int(cc_hist[0]),
        "c0c1": int(cc_hist[1]),
        "c1c0": int(cc_hist[2]),
        "c1c1": int(cc_hist[3]),
    }

    bob1 = bob[first]
    bob2 = bob[second]
    odd = bob1 != bob2
    class1 = keep & odd
    class2 = keep & ~odd & (bob1 == 0)
    class3 = keep & ~odd & (bob1 == 1)
    kept_error = alice[first] != bob[first]

    untagged_pair = s.untagged[first] & s.untagged[second]
    if not bool(keep[untagged_pair].all()):
        raise AssertionError("untagged pairs must always pass the parity comparison")
    if int(kept_error[untagged_pair].sum()) != 0:
        raise AssertionError("untagged survivors must be error-free")

    return BferEmpirical(
        n_pairs=n_pairs,
        leftover=n - 2 * n_pairs,
        pair_counts=pair_counts,
        cc_counts=cc_counts,
        n_survived=int(keep.sum()),
        n_t1=int(class1.sum()),
        n_t2=int(class2.sum()),
        n_t3=int(class3.sum()),
        err1=int((class1 & kept_error).sum()),
        err2=int((class2 & kept_error).sum()),
        err3=int((class3 & kept_error).sum()),
        n1_survived=int(untagged_pair.sum()),
        n_r=int(odd.sum()),
    )


def _aopp_pairs_sequential(bob: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Literal sequential draws: first bit uniform over the remaining pool,
    second uniform over the remaining bits of the opposite value."""
    pool0 = list(np.flatnonzero(bob == 0))
    pool1 = list(np.flatnonzero(bob == 1))
    n_pairs = min(len(pool0), len(pool1))
    u = rng.random(2 * n_pairs)
    firsts = np.empty(n_pairs, dtype=np.int64)
    seconds = np.empty(n_pairs, dtype=np.int64)
    for k in range(n_pairs):
        m0 = len(pool0)
        m1 = len(pool1)
        j = int(u[2 * k] * (m0 + m1))
        if j < m0:
            pool0[j], pool0[-1] = pool0[-1], pool0[j]
            firsts[k] = pool0.pop()
            other = pool1
        else:
            j -= m0
            pool1[j], pool1[-1] = pool1[-1], pool1[j]
            firsts[k] = pool1.pop()
            other = pool0
        i = int(u[2 * k + 1] * len(other))
        other[i], other[-1] = other[-1], other[i]
        seconds[k] = other.pop()
    return firsts, seconds


def _aopp_pairs_shuffle(bob: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Equivalent-in-distribution fast path: shuffle each value class and zip.

    Which class supplies the "first" bit is irrelevant for every tallied
    statistic (kept-bit errors and untagged pairs are order-symmetric).
    """
    zeros = np.flatnonzero(bob == 0)
    ones = np.flatnonzero(bob == 1)
    rng.shuffle(zeros)
    rng.shuffle(ones)
    n_pairs = min(zeros.size, ones.size)
    return zeros[:n_pairs], ones[:n_pairs]


def run_aopp(s: LabeledString, seed: int, method: str = "sequential") -> AoppEmpirical:
    """Literal actively odd-parity pairing on Bob's bits plus the parity check."""
    bob = s.bob_bits
    if not (bool((bob == 0).any()) and bool((bob == 1).any())):
        raise ValueError("actively odd-parity pairing needs both bit values present")
    rng = np.random.default_rng(seed)
    if method == "sequential":
        first, second = _aopp_pairs_sequential(bob, rng)
    elif method == "shuffle":
        first, second = _aopp_pairs_shuffle(bob, rng)
    else:
        raise ValueError(f"unknown pairing method {method!r}")

    alice = s.alice_bits
    keep = (alice[first] ^ alice[second]) == 1  # Bob's parity is odd by construction
    lab1 = s.labels[first]
    lab2 = s.labels[second]
    both_c = keep & (lab1 <= C1) & (lab2 <= C1)
    vd_dv = keep & ~((lab1 <= C1) & (lab2 <= C1))
    kept_error = alice[first] != BOB_BITS[lab1]
    if int((both_c & kept_error).sum()) != 0:
        raise AssertionError("kept one-sender pairs cannot carry bit-flip errors")
    if not bool(kept_error[vd_dv].all()):
        raise AssertionError("kept V/D pairs are always bit-flip errors")
    untagged_pair = s.untagged[first] & s.untagged[second]
    if not bool(keep[untagged_pair].all()):
        raise AssertionError("untagged pairs must always pass the parity check")

    return AoppEmpirical(
        method=method,
        n_a=int(first.size),
        n_both_c=int(both_c.sum()),
        n_vd_dv=int(vd_dv.sum()),
        n_kept=int(keep.sum()),
        n_discarded=int(first.size - keep.sum()),
        errors_kept=int(kept_error[keep].sum()),
        n1_kept=int(untagged_pair.sum()),
    )


def _binomial(trials: float, prob: float) -> tuple[float, float]:
    prob = min(max(prob, 0.0), 1.0)
    return trials * prob, math.sqrt(trials * prob * (1.0 - prob))


def expected_statistics(
    counts: ZWindowCounts, untagged: UntaggedStats, n_bits: int
) -> dict[str, tuple[float, float]]:
    """Analytic expectation and binomial sigma for every compared statistic.

    The actively-paired statistics get an extra variance term from the
    fluctuation of the pair total min(N1, N0); the sigma model assumes the
    two bit groups are not balanced (choose fixtures accordingly).
    """
    n_t = counts.n_t
    q = {
        "c0": counts.n_c0 / n_t,
        "c1": counts.n_c1 / n_t,
        "d": counts.n_d / n_t,
        "v": counts.n_v / n_t,
    }
    q["c"] = q["c0"] + q["c1"]
    pairs = n_bits // 2
    out: dict[str, tuple[float, float]] = {}
    for a in ("c", "d", "v"):
        for b in ("c", "d", "v"):
            out[f"pairs_{a}{b}"] = _binomial(pairs, q[a] * q[b])
    for a in ("c0", "c1"):
        for b in ("c0", "c1"):
            out[f"pairs_{a}{b}"] = _binomial(pairs, q[a] * q[b])

    q_survive = q["c"] ** 2 + q["v"] ** 2 + q["d"] ** 2 + 2.0 * q["v"] * q["d"]
    out["bfer_survivors"] = _binomial(pairs, q_survive)
    q_class1 = 2.0 * (q["v"] * q["d"] + q["c1"] * q["c0"])
    q_class2 = q["d"] ** 2 + q["c0"] ** 2
    q_class3 = q["v"] ** 2 + q["c1"] ** 2
    out["class1_count"] = _binomial(pairs, q_class1)
    out["class2_count"] = _binomial(pairs, q_class2)
    out["class3_count"] = _binomial(pairs, q_class3)
    out["class1_errors"] = _binomial(pairs, 2.0 * q["v"] * q["d"])
    out["class2_errors"] = _binomial(pairs, q["d"] ** 2)
    out["class3_errors"] = _binomial(pairs, q["v"] ** 2)
    out["bfer_untagged"] = _binomial(pairs, (untagged.n1 / n_t) ** 2)

    q0 = counts.n_group0 / n_t
    q1 = counts.n_group1 / n_t
    out["odd_pairs_random"] = _binomial(pairs, 2.0 * q0 * q1)

    q_min = min(q0, q1)
    n_a_mean, n_a_sigma = _binomial(n_bits, q_min)
    out["aopp_pairs"] = (n_a_mean, n_a_sigma)

    def aopp_stat(prob: float) -> tuple[float, float]:
        mean = n_a_mean * prob
        var = n_a_mean * prob * (1.0 - prob) + (prob * n_a_sigma) ** 2
        return mean, math.sqrt(var)

    p_both_c = (counts.n_c1 / counts.n_group1) * (counts.n_c0 / counts.n_group0)
    p_vd = (counts.n_v / counts.n_group1) * (counts.n_d / counts.n_group0)
    out["aopp_both_c"] = aopp_stat(p_both_c)
    out["aopp_vd"] = aopp_stat(p_vd)
    out["aopp_kept"] = aopp_stat(p_both_c + p_vd)
    out["aopp_untagged"] = aopp_stat(
        (untagged.n1_0 / counts.n_group0) * (untagged.n1_1 / counts.n_group1)
    )
    return out


def empirical_statistics(bfer: BferEmpirical, aopp_run: AoppEmpirical) -> dict[str, float]:
    out: dict[str, float] = {}
    for name, value in bfer.pair_counts.items():
        out[f"pairs_{name}"] = float(value)
    for name, value in bfer.cc_counts.items():
        out[f"pairs_{name}"] = float(value)
    out["bfer_survivors"] = float(bfer.n_survived)
    out["class1_count"] = float(bfer.n_t1)
    out["class2_count"] = float(bfer.n_t2)
    out["class3_count"] = float(bfer.n_t3)
    out["class1_errors"] = float(bfer.err1)
    out["class2_errors"] = float(bfer.err2)
    out["class3_errors"] = float(bfer.err3)
    out["bfer_untagged"] = float(bfer.n1_survived)
    out["odd_pairs_random"] = float(bfer.n_r)
    out["aopp_pairs"] = float(aopp_run.n_a)
    out["aopp_both_c"] = float(aopp_run.n_both_c)
    out["aopp_vd"] = float(aopp_run.n_vd_dv)
    out["aopp_kept"] = float(aopp_run.n_kept)
    out["aopp_untagged"] = float(aopp_run.n1_kept)
    return out


@dataclass(frozen=True)
class StatCheck:
    name: str
    analytic: float
    empirical: float
    sigma: float
    z: float
    flagged: bool


def compare(
    empirical: Mapping[str, float],
    analytic: Mapping[str, tuple[float, float]],
    threshold: float = 5.0,
) -> list[StatCheck]:
    """Per-statistic z-scores; |z| beyond the threshold is flagged."""
    rows = []
    for name, (mean, sigma) in analytic.items():
        value = empirical[name]
        if sigma == 0.0:
            z = 0.0 if value == mean else math.inf
        else:
            z = (value - mean) / sigma
        rows.append(
            StatCheck(
                name=name,
                analytic=mean,
                empirical=value,
                sigma=sigma,
                z=z,
                flagged=abs(z) > threshold,
            )
        )
    return rows
