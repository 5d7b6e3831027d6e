"""Key rates for sending-or-not-sending twin-field QKD with two-way
post-processing: refined error counting, bit-flip error rejection,
odd-parity sifting, actively odd-parity pairing, and finite-size analysis,
backed by Monte Carlo and density-matrix verifiers."""

from .channel import ExperimentParams, ProtocolParams, WindowRates, arm_transmittance, window_rates
from .chernoff import EpsilonBudget, chernoff_lower, chernoff_upper, post_rejection_bounds
from .decoy import BoundViolationError, UntaggedStats, untagged_asymptotic, untagged_decoy
from .mathcore import binary_entropy
from .optimizer import OptimizationSpec, optimize
from .pipeline import VARIANTS, PointResult, evaluate
from .postproc import (
    AoppOutcome,
    BferOutcome,
    KeyResult,
    OddSiftOutcome,
    ZWindowCounts,
    aopp,
    bfer_expectations,
    key_length_aopp,
    key_length_bfer,
    key_length_finite,
    key_length_oddsift,
    key_length_original,
    key_length_refined,
    odd_parity_sift,
    z_window_counts,
)
from .presets import PRESETS, preset

__version__ = "0.1.0"

__all__ = [
    "ExperimentParams",
    "ProtocolParams",
    "WindowRates",
    "arm_transmittance",
    "window_rates",
    "EpsilonBudget",
    "chernoff_lower",
    "chernoff_upper",
    "post_rejection_bounds",
    "BoundViolationError",
    "UntaggedStats",
    "untagged_asymptotic",
    "untagged_decoy",
    "binary_entropy",
    "OptimizationSpec",
    "optimize",
    "VARIANTS",
    "PointResult",
    "evaluate",
    "ZWindowCounts",
    "BferOutcome",
    "OddSiftOutcome",
    "AoppOutcome",
    "KeyResult",
    "z_window_counts",
    "bfer_expectations",
    "odd_parity_sift",
    "aopp",
    "key_length_original",
    "key_length_refined",
    "key_length_bfer",
    "key_length_finite",
    "key_length_oddsift",
    "key_length_aopp",
    "PRESETS",
    "preset",
    "__version__",
]
