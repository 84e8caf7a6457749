import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_hardy import scattering as sc
from discrete_hardy.evolution import PotentialProvider, extremizer, free_evolve, random_potential
from discrete_hardy.lattice import LatticeWindow, State
from discrete_hardy.logdomain import LogReal
from discrete_hardy.rng import stream
from discrete_hardy.special import log_factorial

thetas = st.builds(
    lambda r, a: r * cmath.exp(1j * a),
    st.floats(0.5, 2.0),
    st.floats(0.05, math.pi - 0.05),
)


def _fraction_jost_minus(theta, values, n_max):
    """e_minus by exact rational recursion for a potential starting at 0."""
    lam = theta + 1 / theta
    e = {-2: 1 / theta**2, -1: 1 / theta}
    for n in range(-1, n_max):
        v = values[n] if 0 <= n < len(values) else 0
        e[n + 1] = (lam - v) * e[n] - e[n - 1]
    return e


def test_multiplier():
    for th in (2.0, 0.5j, 1.3 * cmath.exp(0.4j)):
        assert sc.multiplier(th) == pytest.approx(th + 1 / th - 2)
        assert sc.multiplier(th) == pytest.approx(sc.multiplier(1 / th))


def test_jost_hand_values():
    j = sc.jost_solve(2.0, PotentialProvider.from_sites([1.0]))
    assert j.at("plus", 0) == 1.0
    assert j.at("plus", -1) == -0.5
    assert j.at("plus", -2) == -2.25
    assert max(j.recurrence_residual()) <= 1e-15


def test_single_site_formula_against_exact_recursion():
    theta, c = Fraction(2), Fraction(1)
    a_p, b_p, _, _ = sc.single_site_coeffs(theta, c)
    assert (a_p, b_p) == (Fraction(1, 3), Fraction(2, 3))
    e = _fraction_jost_minus(theta, [c], 6)
    for n in range(1, 6):
        assert e[n] == a_p * theta**n + b_p * theta**-n


@given(st.fractions(Fraction(1, 4), Fraction(4)).filter(lambda x: x != 1), st.fractions(-3, 3))
@settings(max_examples=40)
def test_single_site_exact_for_rational_inputs(theta, c):
    a_p, b_p, a_m, b_m = sc.single_site_coeffs(theta, c)
    e = _fraction_jost_minus(theta, [c], 4)
    assert e[3] == a_p * theta**3 + b_p * theta**-3
    assert a_p + a_m == 2 and b_p + b_m == 0


@given(thetas, st.floats(-2, 2))
@settings(max_examples=40, deadline=None)
def test_numeric_coefficients_match_single_site(theta, c):
    got = sc.scattering_coeffs(theta, PotentialProvider.from_sites([c]))
    ref = sc.single_site_coeffs(theta, c)
    for x, y in zip((got.a_plus, got.b_plus, got.a_minus, got.b_minus), ref):
        assert abs(x - y) <= 1e-10 * max(1.0, abs(y))


def test_free_coefficients():
    for th in (0.8j, 1.25 * cmath.exp(1j), -2.0 + 0.1j):
        c = sc.scattering_coeffs(th, PotentialProvider.zero())
        assert abs(c.a_plus - 1) <= 1e-12 and abs(c.b_plus) <= 1e-12


near_circle = st.builds(
    lambda r, a: r * cmath.exp(1j * a),
    st.floats(0.8, 1.25),
    st.floats(0.05, math.pi - 0.05),
)


@given(st.integers(0, 2**64 - 1), near_circle)
@settings(max_examples=25, deadline=None)
def test_casoratian_constant_across_window(seed, theta):
    V = random_potential(stream(seed, 6), 1.0, (0, 4), time_dependent=False, finite_support=True)
    j = sc.jost_solve(theta, V)
    ji = sc.jost_solve(1 / theta, V, j.window)
    f, g = j.e_plus, ji.e_plus
    # rounding bound: each W(n) is a difference of two products of size |f g|
    w = abs(sc.casoratian(f, g, 0, j.window))
    scale = float(np.max(np.abs(f[1:] * g[:-1]) + np.abs(f[:-1] * g[1:])))
    assert sc.casoratian_spread(f, g) <= 64 * np.finfo(float).eps * scale / w


@given(st.integers(0, 2**64 - 1), thetas)
@settings(max_examples=25, deadline=None)
def test_casoratian_constant_near_support(seed, theta):
    # away from |theta| = 1 the window edges carry exp(|n| log|theta|)
    # cancellation, so constancy is asserted on the band around the support
    V = random_potential(stream(seed, 6), 1.0, (0, 4), time_dependent=False, finite_support=True)
    c = sc.scattering_coeffs(theta, V)
    assert c.wronskian_spread <= 1e-10
    c2 = sc.scattering_coeffs(theta, V, at=-1)
    assert abs(c.a_plus - c2.a_plus) <= 1e-10 * max(1, abs(c.a_plus))


def test_casoratian_callable_and_array_agree():
    W = LatticeWindow(5)
    f = np.array([2.0**n for n in W.indices])
    g = np.array([0.5**n for n in W.indices])
    assert sc.casoratian(f, g, 0, W) == sc.casoratian(lambda n: 2.0**n, lambda n: 0.5**n, 0)
    assert sc.casoratian_spread(f, g) == 0.0


def test_degenerate_theta():
    with pytest.raises(sc.DegenerateSystemError):
        sc.scattering_coeffs(1.0, PotentialProvider.zero())
    with pytest.warns(RuntimeWarning):
        sc.jost_solve(-1.0, PotentialProvider.zero())
    with pytest.raises(ValueError):
        sc.jost_solve(0.0, PotentialProvider.zero())


def test_phi_series_of_free_kernel():
    # sum_n G(t, n) theta^n = exp(i t (theta + 1/theta - 2))
    W = LatticeWindow(60)
    for th in (0.7j, 1.3 * cmath.exp(0.3j)):
        p = sc.phi_series(free_evolve(State.delta(W), 0.9), th)
        assert p == pytest.approx(cmath.exp(1j * 0.9 * sc.multiplier(th)), rel=1e-12)


def test_phi_series_multiplier_relation_for_extremizer():
    W = LatticeWindow(100)
    u0, u1 = extremizer(0.0, 1.0, W), extremizer(1.0, 1.0, W)
    for th in (0.9j, 1.1 * cmath.exp(2.0j)):
        lhs = sc.phi_series(u1, th)
        rhs = cmath.exp(1j * sc.multiplier(th)) * sc.phi_series(u0, th)
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


# type estimation ---------------------------------------------------------


def test_type_of_exp_half():
    coeffs = [LogReal.from_log(-n * math.log(2) - log_factorial(n)) for n in range(301)]
    est = sc.exp_type_from_coeffs(coeffs, 1, 300)
    assert abs(est.sigma_estimate - 0.5) / 0.5 <= 0.02
    assert not est.divergent


def test_type_with_mpmath_coefficients():
    coeffs = [float(abs(mpmath.besselj(n, 1))) for n in range(151)]
    est = sc.exp_type_from_coeffs(coeffs, 1, 150)
    assert est.sigma_estimate == pytest.approx(0.5, rel=0.05)


def test_type_divergence_flag():
    est = sc.exp_type_from_coeffs([1.0] * 201, 1, 200)
    assert est.divergent and est.growth_slope > 0.9
    with pytest.raises(ValueError):
        sc.exp_type_from_coeffs([1.0] * 10, 1, 20)


# ray growth --------------------------------------------------------------


def test_ray_growth_of_exponentials():
    g = sc.ray_growth(lambda z: cmath.exp(z / 2), 0.0)
    assert g.slope == pytest.approx(0.5, abs=1e-9)
    g = sc.ray_growth(lambda z: cmath.exp(z / 2), math.pi / 2)
    assert abs(g.slope) <= 1e-9


def test_ray_growth_detects_non_linear_growth():
    with pytest.raises(sc.ConvergenceError):
        sc.ray_growth(lambda z: cmath.exp(z * z / 200), 0.0)


def test_ray_growth_gap_for_extremizer():
    W = LatticeWindow(250)
    u0, u1 = extremizer(0.0, 1.0, W), extremizer(1.0, 1.0, W)
    radii = np.geomspace(2.0, 16.0, 12)
    g0 = sc.ray_growth(lambda z: sc.phi_series_log(u0, z), math.pi / 2, radii)
    g1 = sc.ray_growth(lambda z: sc.phi_series_log(u1, z), math.pi / 2, radii)
    assert abs(abs(g1.slope - g0.slope) - 1.0) <= 0.05


def test_taylor_coeffs_from_state():
    W = LatticeWindow(3)
    s = State.from_amplitudes(W, [9, 9, 9, 1, -2, 3j, 0])
    assert [c.value for c in sc.taylor_coeffs_from_state(s)] == pytest.approx([1, 2, 3, 0])
