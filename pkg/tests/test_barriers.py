import numpy as np
import pytest

from sodacan import barriers as B
from sodacan.geometry import Params, SodaCan

# frozen oracle values, computed with mpmath at 40 digits
IRREG_C_3_14_12 = 0.46711311326003713
ODE_2_3_2_APRIME = 1.7480383695280799
ODE_2_3_2_C = 1.2230603904039327


def test_power_barrier_min_j_exact():
    # alpha = 1/6, delta = 7/12, j0 = (12/7)^(-2) * 6 = 49/24
    j0, barrier = B.power_barrier_min_j(Params(2, 1.5, 1.8, 0.5))
    assert j0 == pytest.approx(49 / 24, rel=1e-14)
    assert barrier.alpha == pytest.approx(1 / 6, rel=1e-14)


def test_power_barrier_grid_point_satisfies_bracket():
    P = Params(2, 1.5, 1.8, 0.5)
    j = B.power_barrier_grid_j(P)
    assert B.power_barrier_bracket_coefficient(P, j) <= 1.0
    assert B.power_barrier_bracket_coefficient(P, j / 2 ** 0.125) > 1.0


@pytest.mark.parametrize("P", [Params(2, 2.5, 1.8, 0.5), Params(2, 1.5, 1.4, 0.5),
                               Params(2, 1.5, 1.8, 1.5)])
def test_power_barrier_range(P):
    with pytest.raises(B.ConstructionError):
        B.power_barrier_min_j(P)


def test_kappa_threshold_value():
    assert B.kappa_threshold(Params(2, 4.0, 1.0, 1.0)) == pytest.approx(np.sqrt(3 / 8), rel=1e-15)
    with pytest.raises(B.ConstructionError):
        B.kappa_threshold(Params(2, 1.5, 1.0, 1.0))


def test_m_theta_and_small_data_bound():
    P = Params(4, 3.0, 1.5, 1.0)
    assert B.m_theta(P) == pytest.approx(1 / 36, rel=1e-15)
    # at l = p/(p-1) the coefficient does not depend on delta
    assert B.small_data_bound(P, 1.0, 0.5) == pytest.approx(B.m_theta(P) * 0.5 ** 1.5, rel=1e-14)
    assert B.small_data_bound(P, 0.3, 0.2) == pytest.approx(B.m_theta(P) * 0.2 ** 1.5, rel=1e-14)


def test_irregularity_constant():
    s = B.build_irregularity_supersolution(3, 1.4, 1.2)
    assert s.beta == pytest.approx(5 / 3, rel=1e-15)
    assert s.delta_coef == pytest.approx(0.8, rel=1e-14)
    assert s.C == pytest.approx(IRREG_C_3_14_12, rel=1e-13)


@pytest.mark.parametrize("args", [(3, 2.5, 1.2), (2, 1.9, 1.0), (3, 1.4, 1.5)])
def test_irregularity_out_of_range(args):
    with pytest.raises(B.ConstructionError):
        B.build_irregularity_supersolution(*args)


def test_irregularity_report():
    s = B.build_irregularity_supersolution(3, 1.4, 1.2)
    rep = B.verify_irregularity_supersolution(s, SodaCan(Params(3, 1.4, 1.2, 1.0)))
    assert rep.passed
    # on the lateral boundary the value is C theta^beta at every radius
    assert rep.lateral_min == pytest.approx(s.C, rel=1e-12)


def test_radial_ode_constants():
    o = B.build_radial_ode_barrier(1, 2.0, 4.0)
    # u' = C - 4 r: a'_j = 2 < j = 4 so C solves C - 2 = 4
    assert (o.aj_prime, o.aj, o.Cj) == pytest.approx((2.0, 4.0, 6.0), rel=1e-12)
    o = B.build_radial_ode_barrier(2, 3.0, 2.0)
    assert o.aj_prime == pytest.approx(ODE_2_3_2_APRIME, rel=1e-12)
    assert o.Cj == pytest.approx(ODE_2_3_2_C, rel=1e-12)
    assert float(o.u(np.array([1.0]))[0]) == pytest.approx(o.aj, rel=1e-10)


def test_radial_ode_needs_p_above_n():
    with pytest.raises(B.ConstructionError):
        B.build_radial_ode_barrier(3, 2.0, 1.0)


def test_ode_derivatives_match_differences():
    o = B.build_radial_ode_barrier(2, 3.0, 2.0)
    r, t = np.linspace(0.1, 0.9, 9), np.full(9, -0.3)
    from sodacan.pcalc import check_derivatives
    assert check_derivatives(o.candidate(), r, t) < 1e-6


def test_barenblatt_scale_factor():
    B1 = B.BarenblattSolution(1.0, 3.0, 2)
    Bc = B.BarenblattSolution(2.0, 3.0, 2)
    A = Bc.scale_factor()
    r, t = np.array([0.1, 0.5, 1.0]), np.array([0.5, 1.0, 2.0])
    assert np.allclose(Bc(r, t), B1(r / A, t / A ** 3), rtol=1e-12, atol=0)


def test_barenblatt_support():
    Bs = B.BarenblattSolution(1.0, 3.0, 2)
    R = Bs.support_radius(1.0)
    assert Bs(R * 1.0001, 1.0) == 0.0 and Bs(R * 0.99, 1.0) > 0
    with pytest.raises(ValueError):
        Bs(0.1, 0.0)


def test_barenblatt_barrier_certificates():
    bb = B.build_barenblatt_barrier(2, 3.0, 2.0, 0.5)
    assert all(v <= 1e-12 * max(1.0, abs(v)) for v in bb.certificates.values())
    # the next dyadic delta_eps up must violate some certificate
    if bb.delta_eps < 0.5:
        with pytest.raises(B.ConstructionError):
            B.build_barenblatt_barrier(2, 3.0, 2.0, 0.5, delta_eps=2 * bb.delta_eps)


def test_pasting_rejects_bad_interface():
    dom = SodaCan(Params(2, 3.0, 2.0, 1.0))
    with pytest.raises(B.PastingError):
        B.paste_min_with_constant(lambda r, t: 0 * np.asarray(r) + 0.5, 1.0, 0.5, dom)


def test_pasted_candidate_values():
    dom = SodaCan(Params(2, 3.0, 2.0, 1.0))
    pc = B.paste_min_with_constant(lambda r, t: 2 * np.asarray(r, dtype=float), 0.5, 0.5, dom)
    assert pc(np.array([0.1, 0.4, 0.6]), np.array([-0.001, -0.001, -0.1])) == pytest.approx([0.2, 0.5, 0.5])


def test_verify_barrier_rejects_non_supersolution():
    # |x|^2 has u_t - Delta u = -2n < 0
    P = Params(2, 2.0, 1.5, 1.0)
    rep = B.verify_barrier(lambda r, t: np.asarray(r, dtype=float) ** 2 + 0 * np.asarray(t), SodaCan(P))
    assert not rep.residual_pass
    assert rep.residual_min == pytest.approx(-4.0, rel=1e-6)


def test_growth_check_needs_unbounded_family():
    P = Params(2, 1.5, 1.8, 0.5)
    dom = SodaCan(P)
    assert B.barrier_family_growth_check(B.power_barrier_family(P), dom, k_max=5).passed
    assert not B.barrier_family_growth_check(B.power_barrier_family(P)[:1], dom, k_max=5).passed
