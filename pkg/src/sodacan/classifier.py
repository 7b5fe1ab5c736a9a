"""Regularity verdict for the origin with respect to a soda can.

`classify` applies the known results in a fixed order. `table_audit` sweeps a
rational grid and compares against an independent lookup table of the known
results, evaluated in exact arithmetic.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from .barriers import m_theta, small_data_bound
from .geometry import Params

REGULAR = "Regular"
IRREGULAR = "Irregular"
PARTIAL = "PartialRegular"
UNKNOWN = "Unknown"

# relative tolerance for landing exactly on a threshold such as l = p
EDGE_TOL = 1e-12


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= EDGE_TOL * max(1.0, abs(a), abs(b))


def _lt(a: float, b: float) -> bool:
    return a < b and not _eq(a, b)


@dataclass(frozen=True)
class Classification:
    label: str
    citation: str
    theta_sensitive: bool = False
    bound: Optional[Dict] = None

    def to_dict(self) -> dict:
        d = {"label": self.label, "citation": self.citation, "theta_sensitive": self.theta_sensitive}
        if self.bound is not None:
            d["bound"] = dict(self.bound)
        return d


def singular_threshold(n: int, p: float) -> float:
    """(n - p)(2 - p)/(p - 1): below it the irregularity supersolution exists."""
    return (n - p) * (2 - p) / (p - 1)


def _bound_descriptor(params: Params) -> dict:
    p, l = params.p, params.l
    q = p / (p - 1)
    if _eq(l, q):
        form = "M_theta * |x|^(p/(p-1))"
    elif _eq(l, p):
        form = "M_theta (f continuous at the origin)"
    else:
        form = "M_theta * delta^((p/(p-1)-l)/(p-2)) * min(|x|, delta)^(p/(p-1)), some delta in (0, 1]"
    return {
        "m_theta": m_theta(params),
        "exponent": q,
        "delta_exponent": (q - l) / (p - 2),
        "form": form,
    }


def classify(n: int, p: float, l: float, theta: float) -> Classification:
    params = Params(n, p, l, theta)  # raises ValueError on invalid input
    n, p, l = params.n, params.p, params.l
    if n == 1:
        return Classification(REGULAR, "n = 1: exterior ball condition at the origin")
    if _lt(n, p):
        return Classification(REGULAR, "p > n: the origin has positive p-capacity")
    if _eq(p, 2.0):
        if n == 2:
            return Classification(REGULAR, "heat equation, n = 2: regular for all l and theta")
        if not _lt(l, 2.0):
            return Classification(REGULAR, "heat equation, n >= 3: regular iff l >= 2")
        return Classification(IRREGULAR, "heat equation, n >= 3: regular iff l >= 2")
    if p < 2:
        if _lt(p, l):
            return Classification(REGULAR, "l > p: explicit barrier family")
        critical = 2 * n / (n + 1)
        if _lt(p, critical):
            return Classification(IRREGULAR, "1 < p < 2n/(n+1), l <= p: singular supersolution")
        if _lt(l, singular_threshold(n, p)):
            return Classification(IRREGULAR, "l < (n-p)(2-p)/(p-1): singular supersolution")
        return Classification(UNKNOWN, "open: 2n/(n+1) <= p < 2 with (n-p)(2-p)/(p-1) <= l <= p")
    # p > 2
    if _lt(p, l):
        return Classification(REGULAR, "l > p: Barenblatt barrier family")
    q = p / (p - 1)
    if not _lt(l, q):
        return Classification(
            PARTIAL, "p > 2, p/(p-1) <= l <= p: regular for small boundary oscillation",
            bound=_bound_descriptor(params))
    return Classification(UNKNOWN, "open: p > 2 with l < p/(p-1)")


def partial_bound(n: int, p: float, l: float, theta: float, delta: float, r):
    """Admissible |f - f(0,0)| at radius r for a given delta in (0, 1]."""
    params = Params(n, p, l, theta)
    q = p / (p - 1)
    if not p > 2:
        raise ValueError("partial regularity bound needs p > 2")
    if _lt(l, q) or _lt(p, l):
        raise ValueError("partial regularity bound needs p/(p-1) <= l <= p")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    out = small_data_bound(params, delta, r)
    return float(out) if out.ndim == 0 else out


def optimized_partial_bound(n: int, p: float, l: float, theta: float, r: float) -> float:
    """Largest admissible oscillation at radius r over all delta in (0, 1].

    For l in [p/(p-1), p] the bound rises in delta up to delta = r and falls
    after, so the optimum is delta = min(r, 1).
    """
    if r == 0:
        return 0.0
    return partial_bound(n, p, l, theta, min(r, 1.0), r)


# ---- independent lookup table of the known results, in exact arithmetic ----

def table_cell(n: int, p: Fraction, l: Fraction) -> Optional[str]:
    """Lookup-table label for n >= 2, or None where the table has no entry.

    Returns "empty" if (p, l) falls in a cell marked as having no l.
    """
    if n < 2:
        return None
    if p <= 2:
        T = (n - p) * (2 - p) / (p - 1)
        if l < min(p, T):
            row = 0
        elif T <= l < p:
            row = 1
        elif l == p:
            row = 2
        else:
            row = 3
        critical = Fraction(2 * n, n + 1)
        if p < critical:
            col = ["irreg", "empty", "irreg", "reg"]
        elif p < 2:
            col = ["irreg", "?", "?", "reg"]
        elif n > 2:
            col = ["empty", "irreg", "reg", "reg"]
        else:
            col = ["empty", "reg", "reg", "reg"]
        return col[row]
    if p < n:
        q = p / (p - 1)
        if l < q:
            return "?"
        if l <= p:
            return "partial"
        return "reg"
    return None


_TABLE_TO_LABEL = {"reg": REGULAR, "irreg": IRREGULAR, "?": UNKNOWN, "partial": PARTIAL}


@dataclass
class AuditReport:
    cells_checked: int = 0
    mismatches: List[dict] = field(default_factory=list)
    empty_cell_checks: int = 0
    empty_cell_violations: List[dict] = field(default_factory=list)
    theta_violations: List[dict] = field(default_factory=list)
    monotonicity_violations: List[dict] = field(default_factory=list)
    thetas: tuple = ()

    @property
    def passed(self) -> bool:
        return not (self.mismatches or self.empty_cell_violations
                    or self.theta_violations or self.monotonicity_violations)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "cells_checked": self.cells_checked,
            "mismatches": self.mismatches,
            "empty_cell_checks": self.empty_cell_checks,
            "empty_cell_violations": self.empty_cell_violations,
            "theta_violations": self.theta_violations,
            "monotonicity_violations": self.monotonicity_violations,
            "thetas": list(self.thetas),
        }


def _grid(lo: Fraction, hi: Fraction, step: Fraction):
    k = 0
    while lo + k * step <= hi:
        yield lo + k * step
        k += 1


def table_audit(dims=(2, 3, 4, 5), step: Fraction = Fraction(1, 20),
                thetas=(0.1, 1.0, 10.0), l_margin: Fraction = Fraction(1)) -> AuditReport:
    """Sweep (n, p, l, theta) over every table column and compare with `classify`."""
    rep = AuditReport(thetas=tuple(thetas))
    for n in dims:
        p_values = [p for p in _grid(1 + step, Fraction(n) - step, step) if p <= 2 or p < n]
        for p in p_values:
            pf = float(p)
            T = (n - p) * (2 - p) / (p - 1)
            if p <= 2:
                rep.empty_cell_checks += 1
                if p < Fraction(2 * n, n + 1) and not T >= p:
                    rep.empty_cell_violations.append({"n": n, "p": pf, "cell": "T <= l < p", "T": float(T)})
                if p == 2 and not T <= 0:
                    rep.empty_cell_violations.append({"n": n, "p": pf, "cell": "l < T", "T": float(T)})
            seq = []
            for l in _grid(step, p + l_margin, step):
                expected = table_cell(n, p, l)
                if expected is None:
                    continue
                if expected == "empty":
                    rep.empty_cell_violations.append({"n": n, "p": pf, "l": float(l)})
                    continue
                labels = [classify(n, pf, float(l), th).label for th in thetas]
                rep.cells_checked += 1
                if labels[0] != _TABLE_TO_LABEL[expected]:
                    rep.mismatches.append({"n": n, "p": pf, "l": float(l),
                                           "expected": _TABLE_TO_LABEL[expected], "got": labels[0]})
                if pf != 2.0 and len(set(labels)) > 1:
                    rep.theta_violations.append({"n": n, "p": pf, "l": float(l), "labels": labels})
                seq.append((float(l), labels[0]))
            seen_regular = None
            for l, lab in seq:
                if lab == REGULAR and seen_regular is None:
                    seen_regular = l
                elif lab == IRREGULAR and seen_regular is not None:
                    rep.monotonicity_violations.append({"n": n, "p": pf, "regular_at": seen_regular,
                                                        "irregular_at": l})
                    break
    return rep
