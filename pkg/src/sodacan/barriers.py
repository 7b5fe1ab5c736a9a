"""Explicit barriers and supersolutions for soda-can domains, and their verification.

Residual sign convention: u_t - Delta_p u >= 0 means supersolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.stats import qmc

from .geometry import Domain, Params, SodaCan, SpaceTimePoint
from .pcalc import CandidateFunction, residual_radial


class ConstructionError(ValueError):
    """Parameters lie outside the range where a construction is valid."""


# power barrier u_j = j(|x|^a - (-t)^a), for 1 < p < l ---------------------

def power_barrier_exponents(params: Params):
    """(alpha, delta) with alpha = 1 - p/l and delta = n + (alpha-1)(p-1) - 1."""
    alpha = 1.0 - params.p / params.l
    return alpha, params.n + (alpha - 1.0) * (params.p - 1.0) - 1.0


@dataclass(frozen=True)
class PowerBarrier:
    j: float
    alpha: float
    params: Params

    def __call__(self, r, t):
        return self.j * (np.power(r, self.alpha) - np.power(-np.asarray(t, dtype=float), self.alpha))

    def candidate(self) -> CandidateFunction:
        j, a = self.j, self.alpha
        return CandidateFunction(
            eval=self,
            dr=lambda r, t: j * a * np.power(r, a - 1),
            drr=lambda r, t: j * a * (a - 1) * np.power(r, a - 2),
            dt=lambda r, t: j * a * np.power(-np.asarray(t, dtype=float), a - 1),
            label=f"power barrier j={j:g}",
        )


def _check_power_range(params: Params):
    p, l, th = params.p, params.l, params.theta
    if not (1 < p < 2 and p < l < 2 and 0 < th < 1):
        raise ConstructionError("power barrier needs 1 < p < 2, p < l < 2 and 0 < theta < 1")


def power_barrier_bracket_coefficient(params: Params, j: float) -> float:
    """(j alpha)^(p-2) delta; the barrier is a supersolution once this is <= 1."""
    alpha, delta = power_barrier_exponents(params)
    return (j * alpha) ** (params.p - 2) * delta


def power_barrier_min_j(params: Params):
    """Smallest j with (j alpha)^(p-2) delta <= 1, together with its barrier."""
    _check_power_range(params)
    alpha, delta = power_barrier_exponents(params)
    if delta <= 0:
        j0 = 0.0
    else:
        j0 = (1.0 / delta) ** (1.0 / (params.p - 2)) / alpha
    return j0, PowerBarrier(j0, alpha, params)


def power_barrier_grid_j(params: Params, ratio: float = 2.0 ** 0.125, start: float = 1e-3) -> float:
    """First point of the geometric grid start * ratio^k satisfying the bracket condition."""
    _check_power_range(params)
    j = start
    while power_barrier_bracket_coefficient(params, j) > 1.0:
        j *= ratio
    return j


def power_barrier_family(params: Params, count: int = 40, ratio: float = 2.0):
    j0, _ = power_barrier_min_j(params)
    alpha, _ = power_barrier_exponents(params)
    base = max(j0, 1.0)
    return [PowerBarrier(base * ratio ** k, alpha, params) for k in range(count)]


# v_kappa = kappa(p-1)/p |x|^(p/(p-1)) + n kappa^(p-1) t, for p > 2 ----------

@dataclass(frozen=True)
class KappaBarrier:
    smooth_in_time = True

    kappa: float
    p: float
    n: int

    def __call__(self, r, t):
        p, k = self.p, self.kappa
        return k * (p - 1) / p * np.power(r, p / (p - 1)) + self.n * k ** (p - 1) * np.asarray(t, dtype=float)

    def candidate(self) -> CandidateFunction:
        p, k, n = self.p, self.kappa, self.n
        q = p / (p - 1)
        return CandidateFunction(
            eval=self,
            dr=lambda r, t: k * np.power(r, q - 1),
            drr=lambda r, t: k * (q - 1) * np.power(r, q - 2),
            dt=lambda r, t: n * k ** (p - 1) + 0 * np.asarray(t, dtype=float),
            label=f"kappa barrier kappa={k:g}",
        )


def _require_degenerate(params: Params, need_l: bool = True):
    p, l = params.p, params.l
    if not p > 2:
        raise ConstructionError("this construction needs p > 2")
    if need_l and l < p / (p - 1):
        raise ConstructionError("this construction needs l >= p/(p-1)")


def kappa_threshold(params: Params) -> float:
    """Upper limit ((p-1)/(n p theta))^(1/(p-2)) for kappa."""
    if not params.p > 2:
        raise ConstructionError("kappa threshold is defined for p > 2 only")
    p = params.p
    return ((p - 1) / (params.n * p * params.theta)) ** (1.0 / (p - 2))


def kappa_for_delta(params: Params, delta: float) -> float:
    """The kappa maximizing the lower bound of v_kappa on |x| <= delta."""
    p, l = params.p, params.l
    return (delta ** (p / (p - 1) - l) / (params.n * p * params.theta)) ** (1.0 / (p - 2))


def m_delta(params: Params, delta: float) -> float:
    """Lower bound of v_kappa on the sphere |x| = delta, used as the pasting cap."""
    _require_degenerate(params)
    if not 0 < delta <= 1:
        raise ConstructionError("delta must lie in (0, 1]")
    p = params.p
    return (p - 2) / p * (1.0 / (params.n * p * params.theta)) ** (1.0 / (p - 2)) \
        * delta ** ((p - params.l) / (p - 2))


def m_theta(params: Params) -> float:
    p = params.p
    if not p > 2:
        raise ConstructionError("needs p > 2")
    return (p - 2) / p * (1.0 / (params.n * p * params.theta)) ** (1.0 / (p - 2))


def small_data_bound(params: Params, delta: float, r):
    """Admissible oscillation of boundary data at radius r for the partial-regularity result."""
    _require_degenerate(params)
    if not 0 < delta <= 1:
        raise ConstructionError("delta must lie in (0, 1]")
    p, l = params.p, params.l
    coef = (p - 2) / p * (delta ** (p / (p - 1) - l) / (params.n * p * params.theta)) ** (1.0 / (p - 2))
    return coef * np.power(np.minimum(r, delta), p / (p - 1))


# irregularity supersolution u = C((-t)/|x|^l)^beta, for 1 < p < 2 ------------

@dataclass(frozen=True)
class IrregularitySupersolution:
    C: float
    beta: float
    delta_coef: float
    n: int
    p: float
    l: float

    def __call__(self, r, t):
        return self.C * np.power(-np.asarray(t, dtype=float) / np.power(r, self.l), self.beta)

    def candidate(self) -> CandidateFunction:
        C, b, l = self.C, self.beta, self.l
        a = -b * l

        def dt(r, t):
            return -C * b * np.power(-np.asarray(t, dtype=float), b - 1) * np.power(r, a)

        return CandidateFunction(
            eval=self,
            dr=lambda r, t: C * a * np.power(-np.asarray(t, dtype=float), b) * np.power(r, a - 1),
            drr=lambda r, t: C * a * (a - 1) * np.power(-np.asarray(t, dtype=float), b) * np.power(r, a - 2),
            dt=dt,
            label="irregularity supersolution",
        )


def build_irregularity_supersolution(n: int, p: float, l: float) -> IrregularitySupersolution:
    if not (1 < p < 2):
        raise ConstructionError("irregularity supersolution needs 1 < p < 2")
    beta = 1.0 / (2.0 - p)
    delta = n - (beta * l + 1.0) * (p - 1.0) - 1.0
    if delta <= 0:
        raise ConstructionError(f"delta = {delta:.6g} <= 0: l is outside the admissible range")
    if l > p:
        raise ConstructionError("the supersolution estimate needs l <= p")
    C = (beta / (delta * (beta * l) ** (p - 1))) ** (1.0 / (p - 2))
    return IrregularitySupersolution(C, beta, delta, n, p, l)


# radial ODE barrier for p > n ---------------------------------------------

def _ode_integral(C, j, n, p, upper=1.0):
    """Integral of (C rho^(1-n) - j rho/n)^(1/(p-1)) over (0, upper).

    The factor rho^((1-n)/(p-1)) is handed to the algebraic-weight rule so the
    integrable singularity at 0 costs no accuracy.
    """
    e = (1.0 - n) / (p - 1.0)
    q = 1.0 / (p - 1.0)
    kw = dict(limit=200, epsabs=0.0, epsrel=1e-13)
    if C * n == j and upper == 1.0:
        # the bracket vanishes at rho = 1 like (1 - rho)^q; move that into the weight
        def g(rho):
            rho = min(rho, 1.0 - 1e-300)
            return (j / n) ** q * ((1.0 - rho ** n) / (1.0 - rho)) ** q if rho < 1 else (j / n * n) ** q
        val, err = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(e, q), **kw)
    else:
        def g(rho):
            return max(C - j * rho ** n / n, 0.0) ** q
        val, err = integrate.quad(g, 0.0, upper, weight="alg", wvar=(e, 0.0), **kw)
    if not np.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise ArithmeticError("quadrature did not converge")
    return val


@dataclass(frozen=True)
class RadialOdeBarrier:
    """w_j(x, t) = u_j(|x|) - j t with Delta_p u_j = -j, u_j(0) = 0, u_j(1) = a_j."""
    smooth_in_time = True

    j: float
    n: int
    p: float
    Cj: float
    aj: float
    aj_prime: float

    def u(self, r):
        r = np.asarray(r, dtype=float)
        flat = np.array([_ode_integral(self.Cj, self.j, self.n, self.p, float(x)) if x > 0 else 0.0
                         for x in r.ravel()])
        return flat.reshape(r.shape)

    def du(self, r):
        r = np.asarray(r, dtype=float)
        return np.power(self.Cj * np.power(r, 1 - self.n) - self.j * r / self.n, 1.0 / (self.p - 1))

    def __call__(self, r, t):
        return self.u(r) - self.j * np.asarray(t, dtype=float)

    def candidate(self) -> CandidateFunction:
        j, n, p, C = self.j, self.n, self.p, self.Cj

        def drr(r, t):
            base = C * np.power(r, 1 - n) - j * r / n
            dbase = C * (1 - n) * np.power(r, -n) - j / n
            return np.power(base, 1.0 / (p - 1) - 1) * dbase / (p - 1)

        return CandidateFunction(
            eval=self,
            dr=lambda r, t: self.du(r),
            drr=drr,
            dt=lambda r, t: -j + 0 * np.asarray(t, dtype=float),
            label=f"radial ODE barrier j={j:g}",
        )


def build_radial_ode_barrier(n: int, p: float, j: float) -> RadialOdeBarrier:
    if not p > n >= 1:
        raise ConstructionError("radial ODE barrier needs p > n >= 1")
    if not j > 0:
        raise ConstructionError("j must be positive")
    c0 = j / n
    aj_prime = _ode_integral(c0, j, n, p)
    aj = max(j, aj_prime)
    if aj == aj_prime:
        Cj = c0
    else:
        hi = 2 * c0
        while _ode_integral(hi, j, n, p) < aj:
            hi *= 2
        Cj = optimize.brentq(lambda c: _ode_integral(c, j, n, p) - aj, c0, hi, xtol=1e-14, rtol=1e-14)
    return RadialOdeBarrier(j, n, p, Cj, aj, aj_prime)


def radial_ode_family(n: int, p: float, count: int = 12, ratio: float = 2.0):
    return [build_radial_ode_barrier(n, p, ratio ** k) for k in range(count)]


# Barenblatt solution and barriers built from it -------------------------------

@dataclass(frozen=True)
class BarenblattSolution:
    C: float
    p: float
    n: int

    def __post_init__(self):
        if not self.p > 2:
            raise ConstructionError("Barenblatt profile needs p > 2")
        if not self.C > 0:
            raise ConstructionError("C must be positive")

    @property
    def lam(self) -> float:
        return self.n * (self.p - 2) + self.p

    @property
    def M(self) -> float:
        return (self.p - 2) / (self.p * self.lam ** (1.0 / (self.p - 1)))

    def __call__(self, r, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("Barenblatt solution is defined for t > 0")
        p, lam = self.p, self.lam
        bracket = self.C - self.M * np.power(np.asarray(r, dtype=float) / np.power(t, 1.0 / lam), p / (p - 1))
        return np.power(t, -self.n / lam) * np.power(np.maximum(bracket, 0.0), (p - 1) / (p - 2))

    def support_radius(self, t: float) -> float:
        p = self.p
        return t ** (1.0 / self.lam) * (self.C / self.M) ** ((p - 1) / p)

    def scale_factor(self) -> float:
        """A with B_C(x, t) = B_1(x/A, t/A^p)."""
        lam, p = self.lam, self.p
        return self.C ** (lam * (p - 1) / (p * (lam - p)))

    def candidate(self) -> CandidateFunction:
        return CandidateFunction(eval=self, label=f"Barenblatt C={self.C:g}")


def barenblatt_eval(B: BarenblattSolution, r, t):
    return B(r, t)


def barenblatt_constants(n: int, p: float, l: float):
    lam = n * (p - 2) + p
    theta0 = lam ** ((p - 2) / (p - 1)) / (n * p)
    M = (p - 2) / (p * lam ** (1.0 / (p - 1)))
    alpha = (p - 2) * (lam + n) / (lam * (p - 1))
    gamma = (lam - l) / (alpha * lam)
    tau = (p - l) / (p - 2)
    return lam, theta0, M, alpha, gamma, tau


def _eq1_holds(d, n, p, lam, eps):
    a = n * (p - 2) / (lam * (p - 1))
    return (1 - d) ** (-a) <= 1 + (1 + eps * (p - 2)) * a * d


def _eq2_holds(d, p, eps):
    b = (p - 1) / (p - 2)
    return (1 - d) ** b <= 1 - (1 - eps) * b * d


def choose_delta0(n: int, p: float, eps: float, grid: int = 2001, floor: float = 1e-12) -> float:
    """Largest 2^-k so that both scalar inequalities hold on all of [0, delta0]."""
    lam = n * (p - 2) + p
    a = n * (p - 2) / (lam * (p - 1))
    b = (p - 1) / (p - 2)
    # slopes at 0: right side must dominate strictly
    if not ((1 + eps * (p - 2)) * a > a and -(1 - eps) * b > -b):
        raise ConstructionError("endpoint slopes do not separate")
    d0 = 0.5
    while d0 >= floor:
        ds = np.linspace(0.0, d0, grid)
        if np.all(_eq1_holds(ds, n, p, lam, eps)) and np.all(_eq2_holds(ds, p, eps)):
            return d0
        d0 /= 2
    raise ConstructionError("no admissible delta0 above the floor")


@dataclass(frozen=True)
class BarenblattBarrier:
    """w_eps(x, t) = t_eps^(-n/lam) - B_1(x, t), a barrier at (0, t_eps)."""
    smooth_in_time = True

    n: int
    p: float
    l: float
    epsilon: float
    delta0: float
    delta_eps: float
    t_eps: float
    lam: float
    theta0: float
    M: float
    alpha: float
    gamma: float
    tau: float
    certificates: dict = field(default_factory=dict, compare=False)

    @property
    def solution(self) -> BarenblattSolution:
        return BarenblattSolution(1.0, self.p, self.n)

    @property
    def value_scale(self) -> float:
        return self.t_eps ** (-self.n / self.lam)

    def __call__(self, r, t):
        return self.t_eps ** (-self.n / self.lam) - self.solution(r, t)

    def shifted(self, r, t):
        """w_eps(x, t + t_eps): the barrier moved to the origin."""
        return self(r, np.asarray(t, dtype=float) + self.t_eps)

    def lower_bound(self, r):
        """M (1-eps)^2 |x|^(p/(p-1)) / t_eps^((lam+n)/(lam(p-1)))."""
        p = self.p
        return self.M * (1 - self.epsilon) ** 2 * np.power(r, p / (p - 1)) \
            / self.t_eps ** ((self.lam + self.n) / (self.lam * (p - 1)))

    @property
    def cap(self) -> float:
        return self.M * (1 - self.epsilon) ** 2 * self.delta_eps ** self.tau


def _t_eps_for(delta_eps, n, p, l, lam):
    return delta_eps ** (lam * (l * (p - 1) - p) / ((p - 2) * (lam + n)))


def barenblatt_certificates(n, p, l, eps, delta0, delta_eps):
    """The closed-form smallness conditions at |x| = delta_eps (the worst radius)."""
    lam, theta0, M, alpha, gamma, tau = barenblatt_constants(n, p, l)
    t_eps = _t_eps_for(delta_eps, n, p, l, lam)
    ratio = delta_eps / t_eps ** (1.0 / lam)
    q = p / (p - 1)
    return {
        "t_eps_power": delta_eps ** (l - q) - t_eps ** alpha,
        "assume_small_1": theta0 * delta_eps ** l / t_eps - delta0,
        "assume_small_2": M * (1 - eps) * (p - 2) / (p - 1) * ratio ** q - delta0,
        "inclusion": delta_eps ** gamma - ((p - 1) * delta0 / (M * (1 - eps) * (p - 2))) ** (1 - 1 / p),
        "no_positive_part": ratio ** q - 1.0 / (M * (1 - eps) ** 2),
    }


def _certificates_ok(cert):
    # every entry is "left - right" of an inequality left <= right
    return all(v <= 1e-12 * max(1.0, abs(v)) for v in cert.values())


def build_barenblatt_barrier(n: int, p: float, l: float, epsilon: float,
                             delta_eps: Optional[float] = None, floor: float = 1e-12) -> BarenblattBarrier:
    """Select delta0, then the largest admissible delta_eps = 2^-k (or check a given one)."""
    if not p > 2:
        raise ConstructionError("Barenblatt barrier needs p > 2")
    if not 0 < epsilon < 1:
        raise ConstructionError("epsilon must lie in (0, 1)")
    lam, theta0, M, alpha, gamma, tau = barenblatt_constants(n, p, l)
    if not (p / (p - 1) <= l < lam):
        raise ConstructionError("needs p/(p-1) <= l < lambda")
    if gamma <= 0:
        raise ConstructionError("gamma must be positive")
    delta0 = choose_delta0(n, p, epsilon)
    if delta_eps is None:
        d = 0.5
        while d >= floor:
            if _certificates_ok(barenblatt_certificates(n, p, l, epsilon, delta0, d)):
                delta_eps = d
                break
            d /= 2
        else:
            raise ConstructionError("no admissible delta_eps above the floor")
    cert = barenblatt_certificates(n, p, l, epsilon, delta0, delta_eps)
    if not _certificates_ok(cert):
        raise ConstructionError(f"delta_eps = {delta_eps:g} is not small enough")
    t_eps = _t_eps_for(delta_eps, n, p, l, lam)
    return BarenblattBarrier(n, p, l, epsilon, delta0, delta_eps, t_eps, lam, theta0, M,
                             alpha, gamma, tau, cert)


def largest_admissible_delta_eps(n, p, l, epsilon, floor=1e-12) -> float:
    return build_barenblatt_barrier(n, p, l, epsilon, floor=floor).delta_eps


# pasting -----------------------------------------------------------------

class PastingError(ValueError):
    pass


@dataclass(frozen=True)
class PastedCandidate:
    """min(inner, cap) for |x| < radius and cap for |x| >= radius."""

    inner: Callable
    cap_value: float
    paste_radius: float
    interface_margin: float = float("nan")
    label: str = "pasted"

    def __call__(self, r, t):
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        r, t = np.broadcast_arrays(r, t)
        out = np.full(r.shape, self.cap_value, dtype=float)
        near = r < self.paste_radius
        if np.any(near):
            out[near] = np.minimum(self.inner(r[near], t[near]), self.cap_value)
        return out if out.ndim else float(out)

    def active_inner(self, r, t):
        """Mask of points where the inner function is the active piece."""
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        mask = r < self.paste_radius
        vals = np.where(mask, self.inner(np.where(mask, r, self.paste_radius * 0.5),
                                         np.where(mask, t, 0.0)), np.inf)
        return mask & (vals < self.cap_value)


def paste_min_with_constant(inner: Callable, cap_value: float, paste_radius: float,
                            domain: Domain, samples: int = 2000, label: str = "pasted") -> PastedCandidate:
    """Paste min(inner, cap) inside the sphere onto the constant cap outside.

    The interface check requires inner >= cap on {|x| = paste_radius} within the
    domain; otherwise the result would not be lower semicontinuous.
    """
    lo, hi = domain.radial_time_window(np.array([paste_radius]))
    ts = lo[0] + (hi[0] - lo[0]) * np.linspace(0.0, 1.0, samples)
    vals = np.asarray(inner(np.full(samples, paste_radius), ts), dtype=float)
    margin = float(np.min(vals) - cap_value)
    if margin < -1e-12 * max(1.0, abs(cap_value)):
        raise PastingError(f"inner function falls below the cap on the interface (margin {margin:.3g})")
    return PastedCandidate(inner, float(cap_value), float(paste_radius), margin, label)


def pasted_kappa_barrier(params: Params, delta: float) -> PastedCandidate:
    """min(v_kappa, m_delta) inside |x| < delta, m_delta outside."""
    _require_degenerate(params)
    kappa = kappa_for_delta(params, delta)
    v = KappaBarrier(kappa, params.p, params.n)
    return paste_min_with_constant(v, m_delta(params, delta), delta, SodaCan(params),
                                   label=f"pasted kappa barrier delta={delta:g}")


def barenblatt_family_member(n: int, p: float, l: float, epsilon: float, j: float) -> PastedCandidate:
    """The pasted Barenblatt barrier with delta_eps = 1/j on the can with theta = theta0."""
    bb = build_barenblatt_barrier(n, p, l, epsilon, delta_eps=1.0 / j)
    dom = SodaCan(Params(n, p, l, bb.theta0))
    return paste_min_with_constant(bb.shifted, bb.cap, bb.delta_eps, dom,
                                   label=f"Barenblatt family j={j:g}")


def barenblatt_family(n, p, l, epsilon, count=12, ratio=2.0):
    j0 = 1.0 / largest_admissible_delta_eps(n, p, l, epsilon)
    return [barenblatt_family_member(n, p, l, epsilon, j0 * ratio ** k) for k in range(count)]


@dataclass(frozen=True)
class ScaledBarenblattBarrier:
    """u_eps(x, t) = A w_eps(a x, b t + t_eps) on the can of width theta, cut at |x| = delta."""
    smooth_in_time = True

    base: BarenblattBarrier
    params: Params
    delta: float
    a: float
    b: float
    A: float

    @property
    def value_scale(self) -> float:
        return self.A * self.base.value_scale

    def __call__(self, r, t):
        return self.A * self.base(self.a * np.asarray(r, dtype=float),
                                  self.b * np.asarray(t, dtype=float) + self.base.t_eps)

    def lower_bound(self, r):
        p, l, eps = self.params.p, self.params.l, self.base.epsilon
        coef = (p - 2) * (1 - eps) ** 2 / p * (
            self.delta ** (p / (p - 1) - l) / (self.params.n * p * self.params.theta)) ** (1.0 / (p - 2))
        return coef * np.power(r, p / (p - 1))

    @property
    def cap(self) -> float:
        p, l = self.params.p, self.params.l
        return m_theta(self.params) * (1 - self.base.epsilon) ** 2 * self.delta ** ((p - l) / (p - 2))


def scaled_barenblatt_barrier(params: Params, delta: float, epsilon: float):
    """The second partial-regularity barrier: scaled w_eps pasted with M_theta(1-eps)^2 delta^tau."""
    _require_degenerate(params)
    p, l = params.p, params.l
    if l > p:
        raise ConstructionError("needs l <= p")
    bb = build_barenblatt_barrier(params.n, p, l, epsilon)
    a = bb.delta_eps / delta
    b = bb.theta0 / params.theta * a ** l
    A = (b / a ** p) ** (1.0 / (p - 2))
    u = ScaledBarenblattBarrier(bb, params, delta, a, b, A)
    return paste_min_with_constant(u, u.cap, delta, SodaCan(params),
                                   label=f"scaled Barenblatt barrier delta={delta:g}"), u


# verification ------------------------------------------------------------

@dataclass
class SamplerConfig:
    points: int = 1000
    densify: int = 10
    seed: int = 12345
    near_origin: float = 0.1
    near_lateral: float = 0.1
    path_fractions: Sequence[float] = (0.1, 0.5, 0.9)
    path_levels: int = 60
    path_start: float = 0.5
    d0: float = 0.05
    boundary_points: int = 400
    residual_tol: float = 1e-6
    limit_tol: float = 0.05


def interior_samples(domain: Domain, cfg: SamplerConfig):
    """Halton cloud in slice coordinates, densified near the origin and the lower boundary."""
    halton = qmc.Halton(d=2, scramble=True, seed=cfg.seed)
    base = halton.random(cfg.points)
    extra = cfg.points * cfg.densify // 10
    near0 = halton.random(extra) * np.array([cfg.near_origin, 1.0])
    nearlat = halton.random(extra) * np.array([1.0, cfg.near_lateral])
    us = np.vstack([base, near0, nearlat])
    # keep clear of the exact boundary
    us = np.clip(us, 1e-6, 1 - 1e-6)
    return domain.from_unit_square(us[:, 0], us[:, 1])


def _oracle_hints(f):
    """Time-step floor and internal value scale a candidate declares for the oracle."""
    owner = getattr(f, "__self__", f)
    floor = 1e-3 if getattr(owner, "smooth_in_time", False) else 0.0
    return dict(t_floor=floor, value_scale=float(getattr(owner, "value_scale", 0.0)))


def _residual_of(f, p, n, r, t):
    """Oracle residual and term scale; pasted functions are handled piece by piece."""
    if isinstance(f, PastedCandidate):
        res = np.zeros_like(r)
        scale = np.zeros_like(r)
        noise = np.zeros_like(r)
        act = f.active_inner(r, t)
        if np.any(act):
            res[act], _, scale[act], noise[act] = residual_radial(
                f.inner, p, n, r[act], t[act], with_scale=True, **_oracle_hints(f.inner))
        return res, scale, noise
    ev = f.eval if isinstance(f, CandidateFunction) else f
    res, _, scale, noise = residual_radial(ev, p, n, r, t, with_scale=True, **_oracle_hints(ev))
    return res, scale, noise


@dataclass
class BarrierReport:
    label: str
    residual_min: float
    residual_pass: bool
    limit_max: float
    limit_pass: bool
    boundary_min: float
    boundary_pass: bool
    samples: int

    @property
    def passed(self) -> bool:
        return self.residual_pass and self.limit_pass and self.boundary_pass

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _limit_paths(domain: Domain, cfg: SamplerConfig):
    rs = cfg.path_start * domain.radius_max * 2.0 ** -np.arange(cfg.path_levels)
    lo, hi = domain.radial_time_window(rs)
    return rs, [(lo + (hi - lo) * (1 - s)) for s in cfg.path_fractions]


def _exponent_of(domain: Domain, p: Optional[float]) -> float:
    if p is not None:
        return p
    return domain.params.p if hasattr(domain, "params") else domain.inner.params.p


def residual_samples(f, domain: Domain, cfg: Optional[SamplerConfig] = None,
                     p: Optional[float] = None, n: Optional[int] = None) -> dict:
    """Oracle residual on the interior cloud, with the tolerance margin at each point.

    margin = residual + tol * max(1, term size) + roundoff; the tolerance grows
    with the terms that cancel and with the roundoff of the differences, both
    of which blow up at the axis.
    """
    cfg = cfg or SamplerConfig()
    p = _exponent_of(domain, p)
    n = n or domain.n
    r, t = interior_samples(domain, cfg)
    res, term, noise = _residual_of(f, p, n, r, t)
    margin = res + cfg.residual_tol * np.maximum(1.0, term) + noise
    return {"r": r, "t": t, "residual": res, "margin": margin}


def verify_barrier(f, domain: Domain, xi0: Optional[SpaceTimePoint] = None,
                   cfg: Optional[SamplerConfig] = None, p: Optional[float] = None,
                   n: Optional[int] = None, label: str = "") -> BarrierReport:
    """Check the three barrier predicates at the origin on sampled points.

    (a) residual >= -(tol * max(1, term size) + roundoff) on an interior cloud, (b) values along paths into the
    origin decay to zero, (c) boundary values at distance >= d0 stay positive.
    """
    cfg = cfg or SamplerConfig()
    if xi0 is not None and (xi0.r != 0 or xi0.t != 0):
        raise ValueError("verification is implemented for the origin")
    smp = residual_samples(f, domain, cfg, p, n)

    rs, paths = _limit_paths(domain, cfg)
    vals = np.array([np.abs(np.asarray(f(rs, tp), dtype=float)) for tp in paths])
    scale = max(float(np.max(vals)), 1e-300)
    tail = vals[:, -cfg.path_levels // 4:]
    limit_max = float(np.max(tail))
    decreasing = bool(np.all(np.diff(vals[:, cfg.path_levels // 2:], axis=1) <= 1e-12 * scale))
    limit_pass = decreasing and limit_max <= cfg.limit_tol * scale

    br, bt = domain.boundary_samples(cfg.boundary_points)
    far = np.hypot(br, bt) >= cfg.d0
    bvals = np.asarray(f(br[far], bt[far]), dtype=float)
    bmin = float(np.min(bvals))
    return BarrierReport(label or getattr(f, "label", ""), float(np.min(smp["residual"])),
                         bool(np.min(smp["margin"]) >= 0), limit_max, limit_pass, bmin, bmin > 0,
                         int(smp["r"].size))


@dataclass
class SupersolutionReport:
    """Supersolution that vanishes on the top but not on the lateral boundary near the origin."""

    label: str
    residual_min: float
    residual_pass: bool
    lateral_min: float
    top_max: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.residual_pass and self.lateral_min > 0 and self.top_max == 0.0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def verify_irregularity_supersolution(s: IrregularitySupersolution, domain: SodaCan,
                                      cfg: Optional[SamplerConfig] = None) -> SupersolutionReport:
    cfg = cfg or SamplerConfig()
    smp = residual_samples(s, domain, cfg, s.p, s.n)
    # lateral boundary t = -theta r^l, down to radii far below the sample cloud
    rs = np.concatenate([np.linspace(0.0, 1.0, cfg.boundary_points + 1)[1:],
                         2.0 ** -np.arange(1, cfg.path_levels + 1)])
    lo, hi = domain.radial_time_window(rs)
    return SupersolutionReport("irregularity supersolution", float(np.min(smp["residual"])),
                               bool(np.min(smp["margin"]) >= 0), float(np.min(s(rs, lo))),
                               float(np.max(np.abs(s(rs, hi)))), int(smp["r"].size))


@dataclass
class GrowthReport:
    witnesses: List[Optional[int]]
    k_max: int

    @property
    def passed(self) -> bool:
        return all(w is not None for w in self.witnesses)

    def to_dict(self):
        return {"k_max": self.k_max, "witnesses": self.witnesses, "passed": self.passed}


def barrier_family_growth_check(family: Sequence[Callable], domain: Domain,
                                xi0: Optional[SpaceTimePoint] = None, k_max: int = 10,
                                boundary_points: int = 400) -> GrowthReport:
    """For each k find a member with boundary infimum >= k at distance >= 1/k."""
    br, bt = domain.boundary_samples(boundary_points)
    dist = np.hypot(br, bt)
    infima = []
    for f in family:
        vals = np.asarray(f(br, bt), dtype=float)
        infima.append(vals)
    witnesses: List[Optional[int]] = []
    for k in range(1, k_max + 1):
        far = dist >= 1.0 / k
        found = None
        for i, vals in enumerate(infima):
            if np.min(vals[far]) >= k:
                found = i
                break
        witnesses.append(found)
    return GrowthReport(witnesses, k_max)
