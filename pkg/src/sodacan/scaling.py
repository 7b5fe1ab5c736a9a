"""Parabolic scaling u~(x, t) = A u(a x, b t) with A = (b / a^p)^(1/(p-2)).

The map carries solutions in a domain to solutions in its image under
(x, t) -> (x/a, t/b). For a soda can of width theta the image is again a can,
of width a^l theta / b and radius 1/a.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .geometry import Domain, Params, ScaledImage, SodaCan, SpaceTimePoint, TruncatedSodaCan
from .pcalc import CandidateFunction, residual_radial


@dataclass(frozen=True)
class ScalingTransform:
    a: float
    b: float
    p: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("scale factors a and b must be positive")
        if self.p == 2:
            raise ValueError("the scaling transform is degenerate for p = 2")
        if not self.p > 1:
            raise ValueError("p must exceed 1")

    @property
    def A(self) -> float:
        return (self.b / self.a ** self.p) ** (1.0 / (self.p - 2))

    def theta_tilde(self, l: float, theta: float) -> float:
        return self.a ** l * theta / self.b

    def inverse(self) -> "ScalingTransform":
        return ScalingTransform(1.0 / self.a, 1.0 / self.b, self.p)

    def then(self, other: "ScalingTransform") -> "ScalingTransform":
        """Apply self, then other."""
        if other.p != self.p:
            raise ValueError("transforms for different p do not compose")
        return ScalingTransform(self.a * other.a, self.b * other.b, self.p)

    def image_point(self, pt: SpaceTimePoint) -> SpaceTimePoint:
        """Where a point of the original domain lands in the scaled one."""
        return SpaceTimePoint(tuple(xi / self.a for xi in pt.x), pt.t / self.b)

    def preimage_point(self, pt: SpaceTimePoint) -> SpaceTimePoint:
        return SpaceTimePoint(tuple(xi * self.a for xi in pt.x), pt.t * self.b)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "p": self.p, "A": self.A}


def transform_function(T: ScalingTransform, u: Union[CandidateFunction, Callable]) -> CandidateFunction:
    """A * u(a r, b t), with derivative fields chain-ruled from those of u."""
    A, a, b = T.A, T.a, T.b
    cand = u if isinstance(u, CandidateFunction) else CandidateFunction(eval=u)
    ev = cand.eval

    def scaled(field, factor):
        if field is None:
            return None
        return lambda r, t: A * factor * field(a * np.asarray(r, dtype=float), b * np.asarray(t, dtype=float))

    return CandidateFunction(
        eval=scaled(ev, 1.0),
        dr=scaled(cand.dr, a),
        drr=scaled(cand.drr, a * a),
        dt=scaled(cand.dt, b),
        label=f"{cand.label or 'u'} scaled by a={a:g}, b={b:g}",
    )


def transform_params(T: ScalingTransform, params: Params) -> Params:
    if params.p != T.p:
        raise ValueError("transform and parameters disagree on p")
    return Params(params.n, params.p, params.l, T.theta_tilde(params.l, params.theta))


def transform_domain(T: ScalingTransform, domain: Domain) -> Domain:
    """Image of the domain under (x, t) -> (x/a, t/b); named cans stay cans when the radius is 1."""
    if isinstance(domain, SodaCan) and T.a == 1:
        return SodaCan(transform_params(T, domain.params))
    if isinstance(domain, TruncatedSodaCan) and T.a == domain.delta:
        return SodaCan(transform_params(T, domain.params))
    return ScaledImage(domain, T.a, T.b)


def normalize_soda_can(params: Params, mode: str = "unit_theta",
                       delta: Optional[float] = None) -> Tuple[ScalingTransform, Params]:
    """Transform to the can of width 1 ("unit_theta"), or blow the delta-truncated can up to radius 1 ("unit_radius")."""
    if mode == "unit_theta":
        T = ScalingTransform(1.0, params.theta, params.p)
    elif mode == "unit_radius":
        if delta is None or not delta > 0:
            raise ValueError("unit_radius needs a positive delta")
        T = ScalingTransform(delta, delta ** params.l, params.p)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return T, transform_params(T, params)


def residual_after_transform(T: ScalingTransform, u, n: int, r, t, **oracle) -> np.ndarray:
    """Oracle residual of the transformed function at points (r, t) of the image domain."""
    tu = transform_function(T, u)
    res, _ = residual_radial(tu.eval, T.p, n, np.asarray(r, dtype=float), np.asarray(t, dtype=float), **oracle)
    return res
