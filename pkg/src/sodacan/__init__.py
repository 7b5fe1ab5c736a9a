"""Barriers, capacity estimates, a classifier and a moving-boundary solver for
boundary regularity of soda-can domains under the p-parabolic equation."""

__version__ = "0.1.0"

from .geometry import Params, SpaceTimePoint, SodaCan, PetrovskiiSet, PuncturedCylinder  # noqa: E402
from .classifier import Classification, classify, table_audit  # noqa: E402
from .scaling import ScalingTransform  # noqa: E402
from .solver import SolveConfig, solve, regularity_probe  # noqa: E402
from .wiener import wiener_partial_sums, divergence_integral_test  # noqa: E402

__all__ = [
    "Params", "SpaceTimePoint", "SodaCan", "PetrovskiiSet", "PuncturedCylinder",
    "Classification", "classify", "table_audit", "ScalingTransform",
    "SolveConfig", "solve", "regularity_probe", "wiener_partial_sums", "divergence_integral_test",
]
