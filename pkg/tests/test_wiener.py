import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sodacan import wiener as W
from sodacan.geometry import GeneralizedSodaCan, Params, SodaCan, TabulatedProfile, soda_can_profile

# frozen oracle values (mpmath, 30-40 digits; off-center mass in polar form with I_0)
LEVEL_TIME_3_5 = 0.0078950851278129243
MASS_CENTERED_3 = 0.82820285570326686   # n=3, r=1, s=0.1
MASS_OFFSET_2 = 0.56578265521626988     # n=2, r=0.5, a=0.3, s=0.05
STACK_DENOM_3_5 = 1.1405089689435579    # 1 + sum_{i<5} P(3/2, 1/(4i))


def test_level_time():
    assert W.level_time(3, 5) == pytest.approx(LEVEL_TIME_3_5, rel=1e-15)


def test_fundamental_solution_normalization():
    assert W.fundamental_solution(1, 0.0, 1 / (4 * math.pi)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        W.fundamental_solution(2, [0.0, 0.0], 0.0)


def test_heat_ball_radius():
    n, k = 3, 4
    tk = W.level_time(n, k)
    assert W.heat_ball_radius(n, k, tk) == pytest.approx(0.0, abs=1e-7)
    # the level set {F >= 2^k} has radius r with F = 2^k on its boundary
    t = tk / 3
    r = W.heat_ball_radius(n, k, t)
    assert W.fundamental_solution(n, [r, 0, 0], t) == pytest.approx(2.0 ** k, rel=1e-12)
    assert W.heat_ball_radius(n, k, tk / math.e) == pytest.approx(W.heat_ball_max_radius(n, k), rel=1e-12)
    with pytest.raises(ValueError):
        W.heat_ball_radius(n, k, 2 * tk)


def test_ball_heat_mass_values():
    assert W.ball_heat_mass(3, 1.0, 0.0, 0.1) == pytest.approx(MASS_CENTERED_3, rel=1e-10)
    assert float(W.ball_heat_mass_centered(3, 1.0, 0.1)) == pytest.approx(MASS_CENTERED_3, rel=1e-14)
    assert W.ball_heat_mass(2, 0.5, 0.3, 0.05) == pytest.approx(MASS_OFFSET_2, rel=1e-10)
    assert float(W.ball_heat_mass_fast(2, 0.5, 0.3, 0.05)) == pytest.approx(MASS_OFFSET_2, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.floats(0.1, 2.0), st.floats(0.0, 2.0), st.floats(0.01, 1.0))
def test_fast_mass_matches_quadrature(n, r, a, s):
    slow = W.ball_heat_mass(n, r, a, s)
    fast = float(W.ball_heat_mass_fast(n, r, a, s))
    assert abs(slow - fast) < 1e-8
    assert 0.0 <= fast <= 1.0


def test_stack_denominator():
    assert W._stack_sup_denominator(3, 5) == pytest.approx(STACK_DENOM_3_5, rel=1e-14)


def test_closed_form_supremum_matches_grid_search():
    mu = W.SliceMeasure.stacked(3, 1.0, 4.0)
    best, _, _ = W.maximize_potential(mu)
    closed = mu.total_mass() / W.capacity_lower_bound_cylinder(3, 1.0, 4.0)
    assert best <= closed * (1 + 1e-9)
    assert best == pytest.approx(closed, rel=1e-3)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("h", [0.0, 0.5, 4.0, 30.0])
def test_capacity_sandwich(n, h):
    lo = W.capacity_lower_bound_cylinder(n, 1.0, h)
    hi = W.capacity_upper_bound_cylinder(n, 1.0, h)
    assert 0 < lo <= hi


@pytest.mark.parametrize("n", [2, 3, 4])
def test_capacity_scaling(n):
    # cap(B(0, s r) x [0, s^2 h]) = s^n cap(B(0, r) x [0, h])
    s = 0.37
    for h in (0.0, 1.0, 9.0):
        assert W.capacity_lower_bound_cylinder(n, s, s * s * h) == pytest.approx(
            s ** n * W.capacity_lower_bound_cylinder(n, 1.0, h), rel=1e-12)


def test_capacity_monotone_in_height():
    vals = [W.capacity_lower_bound_cylinder(3, 1.0, h) for h in (0, 1, 2, 4, 8, 16, 64, 1e6)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_invalid_capacity_args():
    with pytest.raises(ValueError):
        W.capacity_lower_bound_cylinder(3, 0.0, 1.0)
    with pytest.raises(ValueError):
        W.capacity_upper_bound_cylinder(3, 1.0, -1.0)


def test_wiener_report_outputs():
    rep = W.wiener_partial_sums(SodaCan(Params(3, 2.0, 2.5, 1.0)), k_max=12)
    assert len(rep.terms) == 12
    for t in rep.terms:
        assert 0 < t.term_lo <= t.term_hi
    csv_text = rep.to_csv()
    assert csv_text.splitlines()[0] == ",".join(W.WienerReport.CSV_COLUMNS)
    assert csv_text == W.wiener_partial_sums(SodaCan(Params(3, 2.0, 2.5, 1.0)), k_max=12).to_csv()
    assert '"verdict"' in rep.to_json()


def test_wiener_needs_heat_equation():
    with pytest.raises(ValueError):
        W.wiener_partial_sums(SodaCan(Params(3, 3.0, 2.0, 1.0)))


def test_generalized_can_matches_soda_can():
    l, th = 1.5, 1.0
    a = W.wiener_partial_sums(SodaCan(Params(3, 2.0, l, th)), k_max=20)
    b = W.wiener_partial_sums(GeneralizedSodaCan(3, soda_can_profile(l, th)), k_max=20)
    assert a.to_csv() == b.to_csv()


def test_integral_test_tabulated():
    taus = 2.0 ** -np.arange(40, -1, -1)
    conv = TabulatedProfile(tuple(taus), tuple(taus ** 0.2))
    div = TabulatedProfile(tuple(taus), tuple(np.ones_like(taus)))
    assert W.divergence_integral_test(3, conv).kind == "Converges"
    assert W.divergence_integral_test(3, div).kind == "Diverges"
    assert W.divergence_integral_test(2, conv).kind == "Diverges"


def test_punctured_cylinder_upper_function():
    eps = 0.1
    assert W.punctured_cylinder_upper_function(eps, 1.0, [0.5, 0.0], -0.05) == 1.0
    assert W.punctured_cylinder_upper_function(eps, 1.0, [0.5, 0.0], -0.5) == pytest.approx(eps * math.log(2))
    assert W.punctured_cylinder_upper_function(eps, 1.0, [1e-9, 0.0], -0.5) == 1.0
    with pytest.raises(ValueError):
        W.punctured_cylinder_upper_function(eps, 1.0, [0.0, 0.0], -0.5)
