"""Space-time domains: soda cans, Petrovskii sets, generalized cans, cylinders.

All domains are open sets in R^n x R and rotationally symmetric in x, so
membership reduces to the radius |x| lying strictly inside a time slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

Slice = Optional[Tuple[float, float]]


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Params:
    """Dimension n, exponent p and can shape (l, theta)."""

    n: int
    p: float
    l: float
    theta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.l > 0:
            raise ValueError(f"l must be positive, got {self.l}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "l", float(self.l))
        object.__setattr__(self, "theta", float(self.theta))

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "l": self.l, "theta": self.theta}


@dataclass(frozen=True)
class SpaceTimePoint:
    x: Tuple[float, ...]
    t: float
    r: float = field(init=False)

    def __post_init__(self):
        xs = tuple(float(v) for v in np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "r", math.hypot(*xs) if xs else 0.0)

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def radial(cls, r: float, t: float, n: int) -> "SpaceTimePoint":
        """Point at distance r along the first coordinate axis."""
        return cls((float(r),) + (0.0,) * (n - 1), t)


# radial profiles ---------------------------------------------------------

@dataclass(frozen=True)
class PowerProfile:
    """rho(tau) = coef * tau**exponent."""

    exponent: float
    coef: float = 1.0

    def __call__(self, tau):
        return self.coef * np.power(tau, self.exponent)

    @property
    def nondecreasing(self) -> bool:
        return self.exponent >= 0

    def to_dict(self) -> dict:
        return {"kind": "power", "exponent": self.exponent, "coef": self.coef}


def soda_can_profile(l: float, theta: float) -> PowerProfile:
    """The profile whose generalized can coincides with the soda can near the origin."""
    return PowerProfile(1.0 / l - 0.5, theta ** (-1.0 / l))


@dataclass(frozen=True)
class TabulatedProfile:
    """Monotone piecewise-linear interpolation, clamped at the table ends."""

    tau: Tuple[float, ...]
    rho: Tuple[float, ...]

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if tau.ndim != 1 or tau.shape != rho.shape or tau.size < 2:
            raise ValueError("tau and rho must be 1-d of equal length >= 2")
        if np.any(np.diff(tau) <= 0):
            raise ValueError("tau must be strictly increasing")
        if tau[0] <= 0 or tau[-1] > 1:
            raise ValueError("tau must lie in (0, 1]")
        if np.any(rho <= 0):
            raise ValueError("rho must be positive")
        if np.any(np.diff(rho) < 0):
            raise ValueError("rho must be nondecreasing")
        object.__setattr__(self, "tau", tuple(tau.tolist()))
        object.__setattr__(self, "rho", tuple(rho.tolist()))

    def __call__(self, tau):
        return np.interp(tau, self.tau, self.rho)

    nondecreasing = True

    def to_dict(self) -> dict:
        return {"kind": "tabulated", "tau": list(self.tau), "rho": list(self.rho)}


RadialProfile = Union[PowerProfile, TabulatedProfile]


def profile_from_dict(d: dict) -> RadialProfile:
    if "tau" in d:
        return TabulatedProfile(tuple(d["tau"]), tuple(d["rho"]))
    return PowerProfile(float(d["exponent"]), float(d.get("coef", 1.0)))


def profile_vanishes_at_zero(rho: RadialProfile, depth: int = 40) -> bool:
    """Sample rho at 2^-k and check the values shrink towards zero."""
    taus = 2.0 ** -np.arange(1, depth + 1)
    vals = np.asarray(rho(taus), dtype=float)
    if isinstance(rho, PowerProfile):
        return rho.exponent > 0
    return bool(vals[-1] <= vals[0] * 1e-3 or vals[-1] < 1e-8)


# domains -----------------------------------------------------------------

class Domain:
    """Rotationally symmetric open space-time set described by its slices."""

    n: int

    def time_slice(self, t: float) -> Slice:
        raise NotImplementedError

    def contains(self, pt: SpaceTimePoint) -> bool:
        if pt.n != self.n:
            raise DimensionMismatch(f"point has dimension {pt.n}, domain has {self.n}")
        return self.contains_radial(pt.r, pt.t)

    def contains_radial(self, r: float, t: float) -> bool:
        sl = self.time_slice(t)
        return sl is not None and sl[0] < r < sl[1]

    def to_dict(self) -> dict:
        raise NotImplementedError

    # slice coordinates: r in (0, radius_max), t in radial_time_window(r)
    radius_max: float = 1.0

    def radial_time_window(self, r):
        """Open interval of times t with (r, t) in the domain, vectorized over r."""
        raise NotImplementedError

    def from_unit_square(self, u, s):
        """Map (u, s) in (0,1)^2 to interior points (r, t)."""
        r = self.radius_max * np.asarray(u, dtype=float)
        lo, hi = self.radial_time_window(r)
        return r, lo + (hi - lo) * np.asarray(s, dtype=float)

    def boundary_samples(self, m: int = 200):
        """Points (r, t) on the closure of the boundary: bottom/lateral, top and outer wall."""
        u = np.linspace(0.0, 1.0, m + 1)[1:]
        r = self.radius_max * u
        lo, hi = self.radial_time_window(r)
        R = np.full(m, self.radius_max)
        wlo, whi = self.radial_time_window(R)
        tw = wlo + (whi - wlo) * np.linspace(0.0, 1.0, m)
        return (np.concatenate([r, r, R]), np.concatenate([lo, hi, tw]))


def _annulus(inner: float, outer: float) -> Slice:
    return (inner, outer) if inner < outer else None


@dataclass(frozen=True)
class SodaCan(Domain):
    """{0 < -t < theta |x|^l < theta}."""

    params: Params

    @property
    def n(self):
        return self.params.n

    def time_slice(self, t):
        th = self.params.theta
        if not (-th < t < 0):
            return None
        return _annulus((-t / th) ** (1.0 / self.params.l), 1.0)

    def radial_time_window(self, r):
        r = np.asarray(r, dtype=float)
        return -self.params.theta * r ** self.params.l, np.zeros_like(r)

    def to_dict(self):
        return {"variant": "soda_can", **self.params.to_dict()}


@dataclass(frozen=True)
class PetrovskiiSet(Domain):
    """{-t > theta |x|^l, -1 < t < 0}: a ball slice of radius (-t/theta)^(1/l)."""

    params: Params

    @property
    def n(self):
        return self.params.n

    def time_slice(self, t):
        if not (-1 < t < 0):
            return None
        return (0.0, (-t / self.params.theta) ** (1.0 / self.params.l))

    def contains_radial(self, r, t):
        # the slice is a full ball, so the axis r = 0 belongs to it
        sl = self.time_slice(t)
        return sl is not None and r < sl[1]

    def to_dict(self):
        return {"variant": "petrovskii", **self.params.to_dict()}


@dataclass(frozen=True)
class GeneralizedSodaCan(Domain):
    """{(-t)^(1/2) rho(-t) < |x| < rho(1), -1 < t < 0}."""

    dim: int
    profile: RadialProfile

    @property
    def n(self):
        return self.dim

    def time_slice(self, t):
        if not (-1 < t < 0):
            return None
        s = -t
        return _annulus(math.sqrt(s) * float(self.profile(s)), float(self.profile(1.0)))

    def to_dict(self):
        return {"variant": "generalized_soda_can", "n": self.dim,
                "profile": self.profile.to_dict()}


@dataclass(frozen=True)
class PuncturedCylinder(Domain):
    """(B(0, r0) minus the origin) x (-t0, 0)."""

    dim: int
    r0: float = 1.0
    t0: float = 1.0

    @property
    def n(self):
        return self.dim

    def time_slice(self, t):
        if not (-self.t0 < t < 0):
            return None
        return (0.0, self.r0)

    @property
    def radius_max(self):
        return self.r0

    def radial_time_window(self, r):
        r = np.asarray(r, dtype=float)
        return np.full_like(r, -self.t0), np.zeros_like(r)

    def boundary_samples(self, m=200):
        r, t = Domain.boundary_samples(self, m)
        axis_t = -self.t0 * np.linspace(0.0, 1.0, m)
        return np.concatenate([r, np.zeros(m)]), np.concatenate([t, axis_t])

    def to_dict(self):
        return {"variant": "punctured_cylinder", "n": self.dim, "r0": self.r0, "t0": self.t0}


@dataclass(frozen=True)
class TruncatedSodaCan(Domain):
    """{0 < -t < theta |x|^l, |x| < delta}."""

    params: Params
    delta: float

    @property
    def n(self):
        return self.params.n

    def time_slice(self, t):
        th, l = self.params.theta, self.params.l
        if not (-th * self.delta ** l < t < 0):
            return None
        return _annulus((-t / th) ** (1.0 / l), self.delta)

    @property
    def radius_max(self):
        return self.delta

    def radial_time_window(self, r):
        r = np.asarray(r, dtype=float)
        return -self.params.theta * r ** self.params.l, np.zeros_like(r)

    def to_dict(self):
        return {"variant": "truncated_soda_can", **self.params.to_dict(), "delta": self.delta}


@dataclass(frozen=True)
class ScaledImage(Domain):
    """Image of `inner` under (x, t) -> (x/a, t/b)."""

    inner: Domain
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("scale factors must be positive")

    @property
    def n(self):
        return self.inner.n

    def time_slice(self, t):
        sl = self.inner.time_slice(self.b * t)
        if sl is None:
            return None
        return (sl[0] / self.a, sl[1] / self.a)

    @property
    def radius_max(self):
        return self.inner.radius_max / self.a

    def radial_time_window(self, r):
        lo, hi = self.inner.radial_time_window(self.a * np.asarray(r, dtype=float))
        return lo / self.b, hi / self.b

    def boundary_samples(self, m=200):
        r, t = self.inner.boundary_samples(m)
        return r / self.a, t / self.b

    def to_dict(self):
        return {"variant": "scaled_image", "inner": self.inner.to_dict(), "a": self.a, "b": self.b}


def lateral_boundary_radius(d: Union[SodaCan, TruncatedSodaCan], t: float) -> float:
    """Radius (-t/theta)^(1/l) of the moving inner boundary at time t."""
    if not isinstance(d, (SodaCan, TruncatedSodaCan)):
        raise TypeError("lateral boundary radius is defined for soda cans only")
    th = d.params.theta
    if not (-th < t < 0):
        raise ValueError(f"t must lie in (-theta, 0), got {t}")
    return (-t / th) ** (1.0 / d.params.l)


def _params_from(d: dict) -> Params:
    return Params(int(d["n"]), float(d["p"]), float(d["l"]), float(d["theta"]))


def domain_from_dict(d: dict) -> Domain:
    v = d["variant"]
    if v == "soda_can":
        return SodaCan(_params_from(d))
    if v == "petrovskii":
        return PetrovskiiSet(_params_from(d))
    if v == "truncated_soda_can":
        return TruncatedSodaCan(_params_from(d), float(d["delta"]))
    if v == "generalized_soda_can":
        return GeneralizedSodaCan(int(d["n"]), profile_from_dict(d["profile"]))
    if v == "punctured_cylinder":
        return PuncturedCylinder(int(d["n"]), float(d.get("r0", 1.0)), float(d.get("t0", 1.0)))
    if v == "scaled_image":
        return ScaledImage(domain_from_dict(d["inner"]), float(d["a"]), float(d["b"]))
    raise ValueError(f"unknown domain variant {v!r}")
