"""Radial p-Laplacian formulas and a finite-difference residual oracle.

Every candidate in the package is radial in x, so the p-Laplacian is

    Delta_p u = |u'|^(p-2) ((p-1) u'' + u' (n-1)/r).

The oracle differentiates `eval` numerically and never looks at the
closed-form derivative fields, so it can be used to audit them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import SpaceTimePoint

G_MIN = 1e-8


class Degenerate:
    """Marker for Delta_p at a vanishing gradient with p < 2 and u'' != 0."""

    def __repr__(self):
        return "Degenerate"


DEGENERATE = Degenerate()


@dataclass(frozen=True)
class CandidateFunction:
    """A radial space-time function u(r, t) with optional exact derivatives."""

    eval: Callable
    dr: Optional[Callable] = None
    drr: Optional[Callable] = None
    dt: Optional[Callable] = None
    label: str = ""

    def __call__(self, r, t):
        return self.eval(r, t)


def delta_p_radial_power(C: float, alpha: float, p: float, n: int, r: float) -> float:
    """Closed form of Delta_p(C |x|^alpha) at |x| = r."""
    if not r > 0:
        raise ValueError("r must be positive")
    ca = C * alpha
    if ca == 0:
        return 0.0
    return ca * abs(ca) ** (p - 2) * (n + (alpha - 1) * (p - 1) - 1) * r ** ((alpha - 1) * (p - 1) - 1)


def radial_p_laplacian(uprime: float, usecond: float, p: float, n: int, r: float):
    """Delta_p of a radial function with u' >= 0, from u'(r) and u''(r)."""
    if uprime < 0:
        raise ValueError("uprime must be nonnegative")
    if not r > 0:
        raise ValueError("r must be positive")
    if uprime == 0:
        if p > 2:
            return 0.0
        if p < 2:
            return 0.0 if usecond == 0 else DEGENERATE
    return uprime ** (p - 2) * ((p - 1) * usecond + uprime * (n - 1) / r)


def radial_p_laplacian_signed(ur, urr, p, n, r, g_min=G_MIN):
    """Vectorized Delta_p for either sign of u'; clamps |u'| below at g_min when p < 2.

    Returns (value, clamped) where clamped marks entries hit by the floor.
    """
    ur = np.asarray(ur, dtype=float)
    g = np.abs(ur)
    clamped = np.zeros(g.shape, dtype=bool)
    if p < 2:
        clamped = g < g_min
        g = np.maximum(g, g_min)
    return g ** (p - 2) * ((p - 1) * urr + ur * (n - 1) / r), clamped


def _steps(r, t, h, t_floor=0.0):
    hr = h * np.abs(r)
    at = np.maximum(np.abs(t), t_floor)
    ht = h * np.where(at == 0, 1.0, at)
    return hr, ht


def _raw_derivatives(f, r, t, hr, ht):
    f0 = f(r, t)
    fp = f(r + hr, t)
    fm = f(r - hr, t)
    ur = (fp - fm) / (2 * hr)
    urr = (fp - 2 * f0 + fm) / hr ** 2
    ut = (f(r, t + ht) - f(r, t - ht)) / (2 * ht)
    return ur, urr, ut


def fd_derivatives(f: Callable, r, t, h: Optional[float] = None, extrapolate: bool = True,
                   t_floor: float = 0.0):
    """Central differences (u_r, u_rr, u_t); optionally Richardson-combined over h and h/2.

    Steps are relative: h*r in space and h*|t| in time. Functions that are
    smooth across t = 0 can pass t_floor so tiny |t| does not shrink the time
    step into roundoff.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if h is None:
        h = 2e-3 if extrapolate else 1e-4
    hr, ht = _steps(r, t, h, t_floor)
    if np.any(r - 2 * hr <= 0):
        raise ValueError("step too large for the distance to the axis r = 0")
    d1 = _raw_derivatives(f, r, t, hr, ht)
    if not extrapolate:
        return d1
    d2 = _raw_derivatives(f, r, t, hr / 2, ht / 2)
    return tuple((4 * b - a) / 3 for a, b in zip(d1, d2))


def residual_radial(f: Callable, p: float, n: int, r, t, h: Optional[float] = None,
                    extrapolate: bool = True, g_min: float = G_MIN, t_floor: float = 0.0,
                    with_scale: bool = False, value_scale: float = 0.0):
    """Vectorized oracle for u_t - Delta_p u at radial coordinates (r, t).

    Returns (residual, clamped). With with_scale it also returns the size of
    the largest individual term and an estimate of the roundoff in the
    residual, for judging cancellation near the axis. value_scale is the size
    of the intermediate quantities inside f when they cancel to a small value.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if h is None:
        h = 2e-3 if extrapolate else 1e-4
    ur, urr, ut = fd_derivatives(f, r, t, h, extrapolate, t_floor)
    lap, clamped = radial_p_laplacian_signed(ur, urr, p, n, r, g_min)
    res = ut - lap
    if not np.all(np.isfinite(res)):
        raise FloatingPointError("candidate evaluation produced non-finite values")
    if not with_scale:
        return res, clamped
    g = np.maximum(np.abs(ur), g_min) if p < 2 else np.abs(ur)
    gp = g ** (p - 2)
    scale = np.maximum(np.abs(ut), gp * ((p - 1) * np.abs(urr) + np.abs(ur) * (n - 1) / r))
    hr, ht = _steps(r, t, h, t_floor)
    if extrapolate:
        hr, ht = hr / 2, ht / 2
    # second differences at the half step dominate the Richardson combination
    ulp = np.finfo(float).eps * np.maximum(np.abs(np.asarray(f(r, t), dtype=float)), value_scale)
    noise = 8 * ulp * (gp * (p - 1) * 4 / hr ** 2 + 1 / ht)
    return res, clamped, scale, noise


@dataclass(frozen=True)
class ResidualValue:
    value: float
    clamped: bool

    def __float__(self):
        return self.value


def residual(f: Callable, p: float, n: int, pt: SpaceTimePoint, h: Optional[float] = None,
             extrapolate: bool = True) -> ResidualValue:
    """Oracle u_t - Delta_p u at a single point; nonnegative means supersolution there."""
    if pt.n != n:
        raise ValueError(f"point dimension {pt.n} does not match n = {n}")
    if not pt.r > 0:
        raise ValueError("residual needs r > 0")
    res, clamped = residual_radial(f, p, n, pt.r, pt.t, h, extrapolate)
    return ResidualValue(float(res), bool(clamped))


def oracle_delta_p(f_of_r: Callable, p: float, n: int, r, h: Optional[float] = None,
                   extrapolate: bool = True):
    """Finite-difference Delta_p of a time-independent radial function."""
    r = np.asarray(r, dtype=float)
    ur, urr, _ = fd_derivatives(lambda rr, tt: f_of_r(rr), r, np.ones_like(r), h, extrapolate)
    lap, _ = radial_p_laplacian_signed(ur, urr, p, n, r)
    return lap


def check_derivatives(f: CandidateFunction, r, t) -> float:
    """Largest relative disagreement between closed-form fields and differences of eval."""
    ur, urr, ut = fd_derivatives(f.eval, r, t)
    worst = 0.0
    for exact, approx in ((f.dr, ur), (f.drr, urr), (f.dt, ut)):
        if exact is None:
            continue
        e = np.asarray(exact(r, t), dtype=float)
        err = np.abs(e - approx) / np.maximum(1.0, np.abs(e))
        worst = max(worst, float(np.max(err)))
    return worst
