import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_hardy import convexity as cx
from discrete_hardy.weights import BridgeWeight, ConvexityWeight, EnergyWeight

mpmath.mp.dps = 50


def _mp_mu(kappa, ktt, n):
    """mu_n from its defining difference of a*b products, in 50 digits."""
    def ab(k):
        d = kappa(k + 1) - kappa(k)
        return 2 * mpmath.sinh(d) * 2 * mpmath.cosh(d)
    return ab(n) - ab(n - 1) + 2 * ktt(n)


def test_energy_coefficients_exact_at_one():
    row = cx.coeff_row(EnergyWeight(1.0), 0.0, 1)
    # d_1 = log(9/2): a = 9/2 - 2/9, b = 9/2 + 2/9
    assert Fraction(row.a).limit_denominator(1000) == Fraction(77, 18)
    assert Fraction(row.b).limit_denominator(1000) == Fraction(85, 18)


@pytest.mark.parametrize("n", [0, 1, 5, 60, 5000])
def test_mu_against_high_precision(n):
    w = ConvexityWeight(2.5, 2.0, 4.0)
    t = 0.3
    kappa = lambda k: mpmath.mpf(w.gamma) * (abs(k) + w.R(t)) * mpmath.log(abs(k) + mpmath.mpf(w.R(t)))  # noqa: E731
    ktt = lambda k: mpmath.diff(lambda s: 2.5 * (abs(k) + 2 + 4 * s * (1 - s)) * mpmath.log(abs(k) + 2 + 4 * s * (1 - s)), t, 2)  # noqa: E731
    ref = _mp_mu(kappa, ktt, n)
    got = cx.coeff_row(w, t, n).mu
    assert got == pytest.approx(float(ref), rel=1e-10)


def test_bridge_mu_center_value():
    w = BridgeWeight(1.0, 0.75)
    row = cx.coeff_row(w, 0.0, 0)
    # d_{-1} = -d_0 so mu_0 = a_0 b_0 - a_{-1} b_{-1} = 2 a_0 b_0
    assert row.mu == pytest.approx(2 * row.a * row.b, rel=1e-14)


@given(st.integers(-10**5, 10**5), st.floats(0, 1))
@settings(max_examples=100)
def test_coefficient_identities(n, t):
    for w in (EnergyWeight(0.5), ConvexityWeight(2.5, 2.0, 4.0), BridgeWeight(1.0, 0.9)):
        row = cx.coeff_row(w, t, n)
        # a and b grow like exp(d); the identity holds to rounding of b^2
        assert abs(row.b**2 - row.a**2 - 4.0) <= 1e-14 * row.b**2
        mirror = cx.coeff_row(w, t, -n)
        assert row.mu == mirror.mu
        assert row.b == cx.coeff_row(w, t, -n - 1).b


def test_coeff_table_sigma_rho_only_for_convexity_weight():
    tab = cx.coeff_table(ConvexityWeight(2.5, 2.0, 4.0), 0.5, np.arange(5))
    assert {"sigma", "rho"} <= set(tab)
    assert "sigma" not in cx.coeff_table(EnergyWeight(0.5), 0.5, np.arange(5))


# bridge ------------------------------------------------------------------


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.5])
@pytest.mark.parametrize("b", [0.75, 0.9, 0.99])
def test_bridge_passes_for_larger_b(gamma, b):
    assert cx.check_bridge(gamma, b, 100000).passed


@pytest.mark.parametrize("b", [0.51, 0.6])
def test_bridge_fails_near_one_half(b):
    # the first two increments already break mu_1 >= 0 once
    # b < log(4/3) / log(log 3 / log 2)
    rep = cx.check_bridge(1.0, b, 1000)
    assert not rep.passed
    assert rep.violations["mu"]["n"] in (-1, 1)
    b_star = math.log(4 / 3) / math.log(math.log(3) / math.log(2))
    assert b < b_star < 0.75


def test_bridge_report_bookkeeping():
    rep = cx.check_bridge(1.0, 0.75, 1000)
    assert set(rep.margins) == set(rep.violations) == set(rep.tolerances)
    assert rep.constants["C3"] > 0
    assert rep.to_dict()["passed"] is True


# quadratic form ----------------------------------------------------------


def test_threshold_polynomial_root():
    assert cx.threshold_polynomial(cx.GAMMA_THRESHOLD) == pytest.approx(0.0, abs=1e-14)
    assert cx.threshold_polynomial(2.5) > 0 > cx.threshold_polynomial(2.0)


def test_quadratic_form_above_threshold():
    sweep = cx.sweep_c0(2.5, 4.0, np.linspace(0, 1, 11), 100000)
    assert sweep.passed and sweep.c0 == 2.0


def test_quadratic_form_below_threshold_records_violation():
    rep = cx.check_quadr(1.0, 2.0, 16.0, np.linspace(0, 1, 11), 1000)
    assert not rep.passed
    v = rep.violations["sigma_sigma_minus_4lambda2"]
    assert v["margin"] < 0


def test_sweep_gives_up():
    sweep = cx.sweep_c0(0.5, 64.0, np.linspace(0, 1, 11), 100000, max_doublings=2)
    assert not sweep.passed and len(sweep.history) == 3


# rho bound ---------------------------------------------------------------


def test_rho_bound_matches_closed_form():
    rb = cx.rho_bound(2.5, 10.0, 0.01)
    assert rb.minimum == pytest.approx(rb.closed_form, rel=1e-10)
    assert rb.c1 == pytest.approx(6.4916, abs=1e-4)
    assert rb.holds
    # independent check of the closed form: mpmath minimisation
    g = lambda M: 0.01 * 2.5 * mpmath.e**5 * M**2 - 40 * 2.5 * (1 + mpmath.log(M))  # noqa: E731
    M = mpmath.findroot(lambda M: mpmath.diff(g, M), rb.critical_point)
    assert rb.minimum == pytest.approx(float(g(M)), rel=1e-12)


def test_rho_bound_leading_order():
    rb = cx.rho_bound(2.5, 1e4, 0.01)
    ratio = rb.minimum / (1e4 * math.log(1e4))
    assert abs(ratio / -5.0 - 1.0) <= 0.15


def test_rho_bound_domain():
    with pytest.raises(ValueError):
        cx.rho_bound(1.5, 10.0, 0.01)
    with pytest.raises(ValueError):
        cx.leading_coefficients(1.0)


def test_convexity_constants():
    lc = cx.fit_convexity_constants(2.5, 2.0, 4.0, np.linspace(0, 1, 11), 100000)
    assert lc.c4 == 0.0
    assert lc.c2 == pytest.approx(2 * lc.c3)
    assert lc.d == pytest.approx(lc.lower_bound / 2)
    lc_v = cx.fit_convexity_constants(2.5, 2.0, 4.0, [0.0, 1.0], 1000, v_sup=2.0)
    assert lc_v.c2 == pytest.approx(lc_v.c4 + 2 * lc_v.c3 + 4.0)


# second difference scan --------------------------------------------------


def test_second_difference_scan_on_known_profile():
    t = np.linspace(0, 1, 51)
    rep = cx.second_difference_scan(t, -3.0 * t * t, C=3.0)
    assert rep.passed
    assert rep.constants["min_second_difference"] == pytest.approx(-6.0)
    rep = cx.second_difference_scan(t, -3.0 * t * t, C=2.0)
    assert not rep.passed


def test_second_difference_scan_rejects_bad_grids():
    with pytest.raises(ValueError):
        cx.second_difference_scan([0, 0.1, 0.3, 0.4, 0.5], np.zeros(5), 0.0)
    with pytest.raises(ValueError):
        cx.second_difference_scan(np.linspace(0, 1, 5), [0, 0, math.inf, 0, 0], 0.0)


# energy weight -----------------------------------------------------------


def test_psipos_sup_is_attained_near_origin():
    rep = cx.check_psipos(0.5, np.linspace(0, 1, 21), 100000)
    assert rep.passed
    assert rep.constants["sup"] == pytest.approx(1.744, abs=1e-3)
    assert abs(rep.constants["argmax_n"]) <= 5


def test_vanishing_pressure_gap_grows():
    rows = cx.vanishing_pressure(2.5, 10.0, [10.0, 100.0, 1000.0])
    gaps = [r.gap for r in rows]
    assert gaps == sorted(gaps) and gaps[0] > 0
    lhs, rhs = cx.leading_coefficients(2.5)
    assert lhs > rhs
    with pytest.raises(ValueError):
        cx.vanishing_pressure(2.0, 10.0, [10.0])


def test_bridge_nu_bound_independent_of_scan_length():
    c3 = [cx.check_bridge(1.0, 0.75, n).constants["C3"] for n in (10**3, 10**4, 10**5)]
    assert c3[0] == pytest.approx(c3[2], rel=5e-4) and c3[1] == pytest.approx(c3[2], rel=5e-4)


def test_rho_minimum_monotone_in_eps():
    mins = [cx.rho_bound(2.5, 10.0, e).minimum for e in (0.001, 0.01, 0.1)]
    assert mins[0] < mins[1] < mins[2]
