import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sodacan import _fallback, kernels

compiled = pytest.importorskip("sodacan._kernels")


def _case(rng, m, axis):
    r = np.linspace(0.0 if axis else 0.1, 1.0, m + 1)
    u = rng.normal(size=m + 1)
    return r, u


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 40), st.booleans(), st.sampled_from([1.3, 2.0, 3.0, 4.5]),
       st.integers(1, 4))
def test_compiled_matches_fallback(seed, m, axis, p, n):
    rng = np.random.default_rng(seed)
    r, u = _case(rng, m, axis)
    lo, hi = (0 if axis else 1), m
    rL = 0.0 if axis else r[0] - 0.3 * (r[1] - r[0])
    uL, uR = 0.3, -0.2
    du_a, du_b = np.zeros_like(u), np.zeros_like(u)
    ca, na = compiled.rates(u, r, lo, hi, rL, uL, r[m], uR, axis, float(n), p, 1e-3, du_a)
    cb, nb = _fallback.rates(u, r, lo, hi, rL, uL, r[m], uR, axis, float(n), p, 1e-3, du_b)
    assert na == nb
    assert ca == pytest.approx(cb, rel=1e-12)
    assert np.allclose(du_a, du_b, rtol=1e-12, atol=1e-12 * np.max(np.abs(du_b)))


def test_heat_rates_on_quadratic_are_second_order():
    # p = 2: the exact rate of |x|^2 is 2n; the flux-form weights are off by O(h^2)
    n = 3
    errs = []
    for m in (50, 100, 200):
        r = np.linspace(0.5, 1.0, m + 1)
        u = r ** 2
        du = np.zeros_like(u)
        kernels.rates(u, r, 1, m, r[0], u[0], r[m], u[m], False, float(n), 2.0, 1e-4, du)
        errs.append(np.max(np.abs(du[1:m] - 2 * n)))
    assert errs[0] < 1e-3
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_empty_range():
    du = np.zeros(4)
    assert _fallback.rates(np.zeros(4), np.linspace(0, 1, 4), 2, 2, 0.0, 0.0, 1.0, 0.0, False,
                           2.0, 2.0, 1e-4, du) == (0.0, 0)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
