"""Finite-size statistics: multiplicative concentration bounds and the
failure-probability budget of the composable security statement."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .mathcore import find_root

__all__ = [
    "EpsilonBudget",
    "ChernoffDelta",
    "solve_deltas",
    "chernoff_upper",
    "chernoff_lower",
    "post_rejection_bounds",
]

_DELTA1_BRACKET_START = 1.0e6
_DELTA2_HI = 1.0 - 1e-15
_ROOT_TOL = 5e-324  # run bisection down to floating-point resolution


@dataclass(frozen=True)
class EpsilonBudget:
    """Failure probabilities entering the finite-size key length."""

    eps_cor: float
    eps_hat: float
    eps_pa: float
    eps_bar: float
    eps_n1: float
    xi: float

    @property
    def eps_sec(self) -> float:
        return math.fsum((2.0 * self.eps_hat, 4.0 * self.eps_bar, self.eps_pa, self.eps_n1))

    @property
    def eps_tot(self) -> float:
        return self.eps_cor + self.eps_sec

    @classmethod
    def from_failure_prob(cls, xi: float) -> "EpsilonBudget":
        """Standard assignment: eps_bar=3*xi, eps_n1=6*xi, the rest equal xi,
        which composes to eps_tot = 22*xi."""
        if not 0.0 < xi < 1.0:
            raise ValueError(f"xi must be in (0, 1), got {xi!r}")
        return cls(eps_cor=xi, eps_hat=xi, eps_pa=xi, eps_bar=3.0 * xi, eps_n1=6.0 * xi, xi=xi)


@dataclass(frozen=True)
class ChernoffDelta:
    """Deviation roots for one expected value and failure probability."""

    delta1: float
    delta2: float
    expected: float
    xi: float
    lower_vacuous: bool = False


def _upper_log_tail(delta: float) -> float:
    # log of (e^d / (1+d)^(1+d))
    return delta - (1.0 + delta) * math.log1p(delta)


def _lower_log_tail(delta: float) -> float:
    # log of (e^-d / (1-d)^(1-d))
    return -delta - (1.0 - delta) * math.log1p(-delta)


def _validate(expected: float, xi: float) -> float:
    if expected <= 0.0:
        raise ValueError(f"expected value must be positive, got {expected!r}")
    if not 0.0 < xi < 1.0:
        raise ValueError(f"xi must be in (0, 1), got {xi!r}")
    return math.log(xi / 2.0)


def _solve_delta1(expected: float, target: float) -> float:
    def upper_eq(delta: float) -> float:
        return expected * _upper_log_tail(delta) - target

    hi = _DELTA1_BRACKET_START
    while upper_eq(hi) > 0.0:
        hi *= 10.0
        if hi > 1e305:  # pragma: no cover - unreachable for positive expected
            raise ArithmeticError("failed to bracket the upper deviation root")
    return find_root(upper_eq, 0.0, hi, _ROOT_TOL)


def _solve_delta2(expected: float, target: float) -> float | None:
    """Root of the lower equation, or None when no root exists in (0, 1)."""
    if expected * _lower_log_tail(_DELTA2_HI) > target:
        return None

    def lower_eq(delta: float) -> float:
        return expected * _lower_log_tail(delta) - target

    return find_root(lower_eq, 0.0, _DELTA2_HI, _ROOT_TOL)


def solve_deltas(expected: float, xi: float) -> ChernoffDelta:
    """Solve the two deviation equations (tail probability xi/2 each).

    The lower equation has no root in (0, 1) when the expected count is below
    ln(2/xi); the lower bound is then vacuous and delta2 is pinned at 1.
    """
    target = _validate(expected, xi)
    delta1 = _solve_delta1(expected, target)
    delta2 = _solve_delta2(expected, target)
    if delta2 is None:
        return ChernoffDelta(delta1, 1.0, expected, xi, lower_vacuous=True)
    return ChernoffDelta(delta1, delta2, expected, xi)


def chernoff_upper(expected: float, xi: float) -> float:
    """High-confidence upper bound (1 + delta1) * expected."""
    target = _validate(expected, xi)
    return (1.0 + _solve_delta1(expected, target)) * expected


def chernoff_lower(expected: float, xi: float) -> float:
    """High-confidence lower bound (1 - delta2) * expected; 0 when vacuous."""
    target = _validate(expected, xi)
    delta2 = _solve_delta2(expected, target)
    if delta2 is None:
        # message kept static so repeated optimizer corner probes dedupe
        warnings.warn(
            "expected count too small for a non-trivial lower bound; clamping to zero",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    return (1.0 - delta2) * expected


def post_rejection_bounds(
    expected_n1_pairs: float, expected_e1ph: float, xi: float
) -> tuple[float, float]:
    """Bounds on the untagged survivors and their iterated phase-flip error.

    Lower-bounds the expected untagged survivor count and upper-bounds the
    survivor phase-error rate, whose expectation is the once-iterated
    2*e*(1-e) of the pre-rejection value.
    """
    if expected_n1_pairs <= 0.0:
        raise ValueError(f"expected untagged survivors must be positive, got {expected_n1_pairs!r}")
    if not 0.0 <= expected_e1ph <= 1.0:
        raise ValueError(f"expected phase error must be in [0, 1], got {expected_e1ph!r}")
    n1_lower = chernoff_lower(expected_n1_pairs, xi)
    expected_errors = expected_n1_pairs * 2.0 * expected_e1ph * (1.0 - expected_e1ph)
    if expected_errors == 0.0:
        return n1_lower, 0.0
    e1_upper = chernoff_upper(expected_errors, xi) / expected_n1_pairs
    return n1_lower, min(e1_upper, 1.0)
