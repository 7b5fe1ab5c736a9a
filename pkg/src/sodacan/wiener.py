"""Heat-equation capacity estimates and the Wiener series for soda-can complements.

Capacity here is thermal capacity: cap(K) = sup mu(K) over measures on K whose
parabolic potential stays <= 1 everywhere. Lower bounds come from explicit
admissible measures, upper bounds from dual measures whose adjoint potential
is >= 1 on K (then mu(K) <= nu(total) for every admissible mu).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special

from .geometry import GeneralizedSodaCan, PowerProfile, SodaCan, TabulatedProfile, soda_can_profile
from .report import csv_text

RadialProfile = Union[PowerProfile, TabulatedProfile]

# exact terms summed before switching to the integral tail bound
EXACT_SLICES = 20000


def ball_volume(n: int, r: float = 1.0) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r ** n


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def fundamental_solution(n: int, x, t: float) -> float:
    """Heat kernel (4 pi t)^(-n/2) exp(-|x|^2 / 4t)."""
    if not t > 0:
        raise ValueError("the heat kernel needs t > 0")
    x2 = float(np.sum(np.square(np.atleast_1d(np.asarray(x, dtype=float)))))
    return (4 * math.pi * t) ** (-n / 2) * math.exp(-x2 / (4 * t))


def level_time(n: int, k: int) -> float:
    """t_k = 2^(-2k/n) / (4 pi), the deepest time the level set {F >= 2^k} reaches."""
    return 2.0 ** (-2.0 * k / n) / (4 * math.pi)


def heat_ball_radius(n: int, k: int, t: float) -> float:
    """Radius of {x : F(x, t) >= 2^k} at depth t in (0, t_k]."""
    tk = level_time(n, k)
    if not (0 < t <= tk * (1 + 1e-14)):
        raise ValueError(f"t must lie in (0, t_k] = (0, {tk}]")
    val = k * math.log(2.0) + (n / 2) * math.log(4 * math.pi * t)
    return math.sqrt(max(-4 * t * val, 0.0)) + 0.0


def heat_ball_max_radius(n: int, k: int) -> float:
    """sup over t of heat_ball_radius: sqrt(2 n t_k / e), attained at t = t_k / e."""
    return math.sqrt(2 * n * level_time(n, k) / math.e)


# heat mass of balls ------------------------------------------------------

def _sphere_average_factor(n: int, rho, a: float, s: float):
    """Integral over the unit sphere of exp(rho a cos / 2s), times exp(-rho a / 2s)."""
    if a == 0:
        return sphere_area(n) * np.exp(-0.0 * rho)
    z = np.asarray(rho * a / (2 * s), dtype=float)
    nu = n / 2 - 1
    small = z < 1e-6
    zs = np.where(small, 1.0, z)
    big = math.gamma(n / 2) * (2 / zs) ** nu * special.ive(nu, zs)
    # two terms of the series of (2/z)^nu Gamma(nu+1) I_nu(z), times exp(-z)
    series = np.exp(-z) * (1 + z * z / (4 * (nu + 1)))
    return sphere_area(n) * np.where(small, series, big)


def ball_heat_mass(n: int, r: float, a: float, s: float) -> float:
    """Integral of F(x - x0, s) over B(0, r) with |x0| = a, by radial quadrature."""
    if not s > 0:
        return 0.0
    if r <= 0:
        return 0.0
    if math.isinf(r):
        return 1.0
    width = 20 * math.sqrt(s)
    lo, hi = max(0.0, a - width), min(r, a + width)
    if hi <= lo:
        return 0.0

    def integrand(rho):
        if rho == 0 and n > 1:
            return 0.0
        g = math.exp(-(rho - a) ** 2 / (4 * s))
        return (4 * math.pi * s) ** (-n / 2) * rho ** (n - 1) * g * float(_sphere_average_factor(n, rho, a, s))

    pts = [a] if lo < a < hi else None
    val, err = integrate.quad(integrand, lo, hi, points=pts, limit=200, epsabs=1e-13, epsrel=1e-11)
    if not np.isfinite(val) or err > 1e-7:
        raise ArithmeticError("ball heat mass quadrature did not converge")
    return min(val, 1.0)


def ball_heat_mass_centered(n: int, r, s):
    """Closed form of ball_heat_mass at a = 0: regularized lower incomplete gamma."""
    s = np.asarray(s, dtype=float)
    return special.gammainc(n / 2, np.asarray(r, dtype=float) ** 2 / (4 * s))


def ball_heat_mass_fast(n: int, r, a, s):
    """Vectorized ball_heat_mass through the noncentral chi-square distribution."""
    s = np.asarray(s, dtype=float)
    a = np.asarray(a, dtype=float)
    x = np.asarray(r, dtype=float) ** 2 / (2 * s)
    nc = a ** 2 / (2 * s)
    return np.where(nc == 0, special.gammainc(n / 2, x / 2), special.chndtr(x, n, nc))


# measures and potentials -------------------------------------------------

@dataclass(frozen=True)
class SliceMeasure:
    """Sum of weight * Lebesgue measure on B(0, r) x {c} over the slices."""

    n: int
    slices: Tuple[Tuple[float, float, float], ...]

    @classmethod
    def stacked(cls, n: int, r: float, h: float, spacing: Optional[float] = None) -> "SliceMeasure":
        """Unit-weight slices at levels 0, d, 2d, ... <= h with d = r^2 by default."""
        d = r * r if spacing is None else spacing
        count = int(math.floor(h / d + 1e-12)) + 1
        return cls(n, tuple((j * d, r, 1.0) for j in range(count)))

    def total_mass(self) -> float:
        return sum(w * ball_volume(self.n, r) for _, r, w in self.slices)

    def with_slice(self, c: float, r: float, w: float = 1.0) -> "SliceMeasure":
        return SliceMeasure(self.n, self.slices + ((c, r, w),))


def _radius_of(x0) -> float:
    if np.ndim(x0) == 0:
        return abs(float(x0))
    return float(np.linalg.norm(np.asarray(x0, dtype=float)))


def parabolic_potential(mu: SliceMeasure, x0, t0: float) -> float:
    """P^mu(x0, t0); x0 may be a point or its distance from the axis."""
    a = _radius_of(x0)
    return sum(w * ball_heat_mass(mu.n, r, a, t0 - c) for c, r, w in mu.slices if c < t0)


def potential_fast(mu: SliceMeasure, a, t0):
    """Vectorized P^mu over arrays of axis distances and times."""
    a = np.asarray(a, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    out = np.zeros(np.broadcast(a, t0).shape)
    for c, r, w in mu.slices:
        s = t0 - c
        pos = s > 0
        if np.any(pos):
            val = ball_heat_mass_fast(mu.n, r, np.broadcast_to(a, out.shape)[pos],
                                      np.broadcast_to(s, out.shape)[pos])
            out[pos] += w * val
    return out


def maximize_potential(mu: SliceMeasure, grid: int = 64, rounds: int = 2) -> Tuple[float, float, float]:
    """Grid search for sup P^mu over (|x0|, t0) above the top slice, with local refinement.

    Returns (value, |x0|, t0). Serves as a check on the closed-form supremum
    used for stacked measures.
    """
    top = max(c for c, _, _ in mu.slices)
    rmax = max(r for _, r, _ in mu.slices)
    a_axis = np.concatenate([[0.0], np.logspace(-3, 1, grid - 1) * rmax])
    s_axis = np.logspace(-6, 2, grid) * rmax ** 2
    best = (-1.0, 0.0, top)
    for _ in range(rounds + 1):
        A, S = np.meshgrid(a_axis, s_axis, indexing="ij")
        vals = potential_fast(mu, A, top + S)
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[i, j] > best[0]:
            best = (float(vals[i, j]), float(A[i, j]), float(top + S[i, j]))
        ai, sj = a_axis[i], s_axis[j]
        a_axis = np.linspace(max(0.0, ai * 0.5), ai * 2 + 1e-12, grid)
        s_axis = np.geomspace(sj / 4, sj * 4, grid)
    return best


def _stack_sup_denominator(n: int, count: float) -> float:
    """Upper bound for sup P of the unit stack with `count` slices spaced r^2.

    The potential of a centered ball slice is largest on the axis and
    decreases in the elapsed time, so the supremum is the limit just above
    the top slice: 1 + sum_{i=1}^{count-1} gammainc(n/2, 1/(4i)). Past
    EXACT_SLICES terms gammainc(m, x) <= x^m / Gamma(m+1) bounds the rest by
    an integral.
    """
    m = n / 2
    exact = int(min(count - 1, EXACT_SLICES))
    i = np.arange(1, exact + 1, dtype=float)
    total = 1.0 + float(np.sum(special.gammainc(m, 1.0 / (4 * i))))
    if count - 1 > exact:
        c0 = 4.0 ** (-m) / math.gamma(m + 1)
        lo, hi = float(exact), float(count - 1)
        if m == 1:
            tail = c0 * math.log(hi / lo)
        else:
            tail = c0 * (lo ** (1 - m) - hi ** (1 - m)) / (m - 1)
        total += tail
    return total


def _slice_count(d: float, h: float) -> float:
    """Number of levels 0, d, 2d, ... in [0, h]."""
    ratio = h / d
    if ratio > 1e15:
        return ratio + 1.0
    return float(math.floor(ratio + 1e-12) + 1)


def capacity_lower_bound_cylinder(n: int, r: float, h: float) -> float:
    """mu(C) / sup P^mu for unit slices at levels j r^2 in the cylinder B(0, r) x [0, h]."""
    if not (r > 0 and h >= 0):
        raise ValueError("need r > 0 and h >= 0")
    if n < 1:
        raise ValueError("n must be positive")
    count = _slice_count(r * r, h)
    return count * ball_volume(n, r) / _stack_sup_denominator(n, count)


@lru_cache(maxsize=None)
def _dual_coverage(n: int, ratio: float, spacing: float) -> float:
    """min over |x| <= 1 and 0 < s <= spacing of the heat mass of B(0, ratio) seen from x."""
    s = np.geomspace(1e-4 * spacing, spacing, 400)
    vals = ball_heat_mass_fast(n, ratio, np.ones_like(s), s)
    return float(np.min(vals))


DUAL_RATIOS = (1.25, 1.5, 2.0, 3.0)
DUAL_SPACINGS = (0.125, 0.25, 0.5, 1.0)


def capacity_upper_bound_cylinder(n: int, r: float, h: float) -> float:
    """Dual bound for cap(B(0, r) x [0, h]).

    Slices of radius R at times d, 2d, ... past every point of the cylinder
    give adjoint potential >= coverage there; scaled by 1/coverage they bound
    the capacity by their total mass. The best (R, d) from a small menu wins.
    """
    if not (r > 0 and h >= 0):
        raise ValueError("need r > 0 and h >= 0")
    best = math.inf
    for f in DUAL_SPACINGS:
        count = _slice_count(f * r * r, h)
        for q in DUAL_RATIOS:
            g = _dual_coverage(n, q, f)
            best = min(best, count * ball_volume(n, q * r) / g)
    return best


# Wiener series -----------------------------------------------------------

def _profile_of(domain) -> Tuple[int, RadialProfile]:
    if isinstance(domain, SodaCan):
        if domain.params.p != 2:
            raise ValueError("the Wiener series is for the heat equation (p = 2)")
        return domain.n, soda_can_profile(domain.params.l, domain.params.theta)
    if isinstance(domain, GeneralizedSodaCan):
        return domain.n, domain.profile
    raise TypeError("expected a SodaCan or GeneralizedSodaCan")


def _rho(profile: RadialProfile, tau: float) -> float:
    return float(np.asarray(profile(np.asarray(tau, dtype=float))))


@dataclass(frozen=True)
class WienerTerm:
    k: int
    t_k: float
    r_k: float
    cap_lo: float
    cap_hi: float
    term_lo: float
    term_hi: float
    partial_lo: float
    partial_hi: float
    clamped: bool


@dataclass(frozen=True)
class Verdict:
    kind: str  # "Diverges", "Converges" or "Inconclusive"
    evidence: Dict[str, float] = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "evidence": dict(self.evidence)}


@dataclass(frozen=True)
class WienerReport:
    n: int
    k_max: int
    c: float
    k0: Optional[int]
    window: Tuple[int, int]
    terms: Tuple[WienerTerm, ...]
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "n": self.n, "k_max": self.k_max, "c": self.c, "k0": self.k0,
            "window": list(self.window),
            "terms": [t.__dict__ for t in self.terms],
            "verdict": self.verdict.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    CSV_COLUMNS = ("k", "t_k", "r_k", "cap_lo", "cap_hi", "term_lo", "term_hi", "partial_lo", "partial_hi")

    def to_csv(self) -> str:
        return csv_text(self.CSV_COLUMNS,
                        ([t.k] + [float(getattr(t, c)) for c in self.CSV_COLUMNS[1:]] for t in self.terms))


def inclusion_constants(n: int) -> Tuple[float, float]:
    """(c, rho_cap): (1+c)^(n/2) = 3/2 and exp(-rho^2 / 4(1+c)) >= 3/4 iff rho <= rho_cap."""
    c = 1.5 ** (2.0 / n) - 1
    return c, math.sqrt(4 * (1 + c) * math.log(4.0 / 3.0))


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x, y, 1)[0])


def wiener_partial_sums(domain, k_max: int = 40, slope_tol: float = 0.01,
                        harmonic_tol: float = 0.05) -> WienerReport:
    """Lower and upper bounds for the terms 2^k cap(shell_k minus domain), k = 1..k_max.

    The lower term uses the cylinder B(0, r_k) x [-(1+c) t_k, -t_k] inside the
    next shell; r_k is clamped so that the level-set inclusion holds for every
    k. The upper term uses B(0, R_k) x [-t_k, 0] with R_k the smaller of the
    lateral radius at t_k and the widest heat ball.
    """
    n, profile = _profile_of(domain)
    if k_max < 4:
        raise ValueError("k_max must be at least 4")
    c, rho_cap = inclusion_constants(n)
    rows: List[WienerTerm] = []
    plo = phi = 0.0
    k0 = None
    for k in range(1, k_max + 1):
        tk = level_time(n, k)
        tk1 = level_time(n, k + 1)
        rho_k = _rho(profile, tk)
        rho_k1 = _rho(profile, tk1)
        clamped = rho_k1 > rho_cap
        if not clamped and k0 is None:
            k0 = k
        elif clamped:
            k0 = None
        r_lo = math.sqrt(tk1) * min(rho_k1, rho_cap)
        cap_lo = capacity_lower_bound_cylinder(n, r_lo, c * tk1)
        r_hi = min(math.sqrt(tk) * rho_k, heat_ball_max_radius(n, k))
        cap_hi = capacity_upper_bound_cylinder(n, r_hi, tk)
        term_lo = 2.0 ** k * cap_lo
        term_hi = 2.0 ** k * cap_hi
        plo += term_lo
        phi += term_hi
        rows.append(WienerTerm(k, tk, math.sqrt(tk) * rho_k, cap_lo, cap_hi, term_lo, term_hi,
                               plo, phi, clamped))
    start = max(k0 or 1, k_max // 2 + 1)
    if k_max - start < 3:
        start = k_max - 3
    window = (start, k_max)
    verdict = _trend_verdict(rows, window, slope_tol, harmonic_tol)
    return WienerReport(n, k_max, c, k0, window, tuple(rows), verdict)


def _trend_verdict(rows: Sequence[WienerTerm], window, slope_tol, harmonic_tol) -> Verdict:
    sel = [t for t in rows if window[0] <= t.k <= window[1]]
    ks = np.array([t.k for t in sel], dtype=float)
    hi = np.array([t.term_hi for t in sel])
    lo = np.array([t.term_lo for t in sel])
    s_hi = _fit_slope(ks, np.log(hi))
    if s_hi <= -slope_tol:
        q = math.exp(s_hi)
        tail = float(hi[-1] * q / (1 - q))
        return Verdict("Converges", {"upper_log_slope": s_hi, "ratio": q, "tail_bound": tail,
                                     "partial_hi": rows[-1].partial_hi})
    s_lo = _fit_slope(np.log(ks), np.log(lo))
    if s_lo >= -1 - harmonic_tol:
        return Verdict("Diverges", {"lower_loglog_slope": s_lo, "upper_log_slope": s_hi,
                                    "partial_lo": rows[-1].partial_lo})
    return Verdict("Inconclusive", {"upper_log_slope": s_hi, "lower_loglog_slope": s_lo})


# the integral test -------------------------------------------------------

def divergence_integral_test(n: int, rho: RadialProfile, depth: int = 60) -> Verdict:
    """Decide whether the integral of rho(tau)^(n-2) dtau / tau over (0, 1) diverges."""
    if n < 2:
        raise ValueError("the integral test needs n >= 2")
    if n == 2:
        return Verdict("Diverges", {"reason_exponent": 0.0})
    if isinstance(rho, PowerProfile):
        e = rho.exponent * (n - 2)
        return Verdict("Diverges" if e <= 0 else "Converges", {"integrand_exponent": e - 1})
    if isinstance(rho, TabulatedProfile):
        tmin = float(rho.tau[0])
        levels = [2.0 ** -m for m in range(depth + 1) if 2.0 ** -m >= tmin]
        if len(levels) < 6:
            return Verdict("Inconclusive", {"blocks": float(len(levels) - 1)})
        blocks = []
        for hi, lo in zip(levels[:-1], levels[1:]):
            val, _ = integrate.quad(lambda s: _rho(rho, math.exp(s)) ** (n - 2), math.log(lo), math.log(hi))
            blocks.append(val)
        blocks = np.array(blocks)
        tail = blocks[len(blocks) // 2:]
        if np.all(tail > 0):
            slope = _fit_slope(np.arange(tail.size, dtype=float), np.log(tail))
        else:
            slope = -math.inf
        ev = {"partial_integral": float(np.sum(blocks)), "block_log_slope": slope}
        if slope <= -0.01:
            return Verdict("Converges", ev)
        if slope >= -0.001:
            return Verdict("Diverges", ev)
        return Verdict("Inconclusive", ev)
    raise TypeError("unknown profile type")


def punctured_cylinder_upper_function(epsilon: float, r0: float, x, t: float) -> float:
    """min(eps log(1/|x|), 1) for t <= -eps, and 1 above; a superparabolic upper function."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    r = _radius_of(x)
    if np.ndim(x) > 0 and np.size(x) != 2:
        raise ValueError("the punctured cylinder lives in dimension 2")
    if r == 0:
        raise ValueError("undefined on the axis x = 0")
    if not r < r0:
        raise ValueError("x must lie inside the cylinder")
    if not -1 < t < 0:
        raise ValueError("t must lie in (-1, 0)")
    if t > -epsilon:
        return 1.0
    return min(epsilon * math.log(1.0 / r), 1.0)
