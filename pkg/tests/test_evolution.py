import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_hardy import evolution as ev
from discrete_hardy.lattice import LatticeWindow, State, l2_distance, l2_norm
from discrete_hardy.rng import stream
from discrete_hardy.weights import EnergyWeight

mpmath.mp.dps = 30


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 1.9])
@pytest.mark.parametrize("n", [-7, -1, 0, 1, 4, 40])
def test_free_kernel_against_mpmath(t, n):
    ref = complex(mpmath.exp(-2j * t) * mpmath.mpc(0, 1) ** n * mpmath.besselj(n, 2 * t))
    got = ev.free_kernel(t, n).value
    # the series cancels near zeros of J_n (absolute error), and a value
    # stored as exp(log_mag) carries |log_mag| * 1e-16 relative error
    assert abs(got - ref) <= 1e-13 * abs(ref) + 1e-15


def test_free_evolution_of_delta_is_the_kernel():
    W = LatticeWindow(30)
    out = ev.free_evolve(State.delta(W), 0.8)
    for n in (-5, 0, 3, 12):
        assert out[n] == pytest.approx(ev.free_kernel(0.8, n).value, rel=1e-13)


def test_free_evolution_matches_stepping():
    W = LatticeWindow(40)
    s = State.delta(W)
    trace = ev.step_evolve(s, None, None, 0.0, 1.0, 1e-3)
    assert l2_distance(ev.free_evolve(s, 1.0), trace.final) <= 1e-8


def test_semigroup_and_time_reversal():
    W = LatticeWindow(60)
    s = ev.extremizer(0.0, 1.0, W)
    a = ev.free_evolve(ev.free_evolve(s, 0.7), 1.6)
    b = ev.free_evolve(s, 2.3)
    assert l2_distance(a, b) <= 1e-12
    back = ev.free_evolve(ev.free_evolve(s, 1.1), -1.1)
    assert l2_distance(back, s) <= 1e-12
    assert b.tail_bound.value < 1e-30


def test_extremizer_solves_the_free_equation():
    W = LatticeWindow(60)
    for t in (0.1, 0.5, 0.9):
        r = ev.residual(lambda s: ev.extremizer(s, 1.0, W), None, t,
                        derivative=lambda s: ev.extremizer_time_derivative(s, 1.0, W))
        assert r <= 1e-12
        # finite differences agree up to their own truncation error
        assert ev.residual(lambda s: ev.extremizer(s, 1.0, W), None, t) <= 1e-8


def test_extremizer_focuses_at_half_time():
    W = LatticeWindow(20)
    u = ev.extremizer(0.5, 2.0 - 1.0j, W)
    assert u[0] == pytest.approx((2.0 - 1.0j) * np.exp(-1j), rel=1e-15)
    assert all(u.log_mag[k] == -math.inf for k in range(W.size) if k != W.position(0))


@given(st.floats(0, 1), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
@settings(max_examples=30, deadline=None)
def test_extremizer_norm_is_amplitude(t, A):
    # sum_n J_n(x)^2 = 1
    u = ev.extremizer(t, A, LatticeWindow(40))
    assert l2_norm(u).value == pytest.approx(abs(A), rel=1e-13)


def test_extremizer_is_the_free_evolution_of_its_initial_state():
    W = LatticeWindow(80)
    u0 = ev.extremizer(0.0, 1.0, W)
    assert l2_distance(ev.free_evolve(u0, 0.7), ev.extremizer(0.7, 1.0, W)) <= 1e-13


@given(st.integers(0, 2**64 - 1))
@settings(max_examples=5, deadline=None)
def test_real_potential_conserves_norm(seed):
    V = ev.random_potential(stream(seed, 1), 1.0, (-10, 10))
    s = State.delta(LatticeWindow(32))
    tr = ev.step_evolve(s, V, None, 0.0, 0.5, 1e-3)
    assert np.max(np.abs(tr.norms - 1.0)) <= 1e-9


def test_complex_potential_and_forcing_are_not_norm_checked(monkeypatch):
    monkeypatch.setattr(ev, "NORM_DRIFT_LIMIT", 0.0)
    s = State.delta(LatticeWindow(8))
    V = ev.random_potential(stream(1, 1), 1.0, (-4, 4), imag_sup_norm=0.5)
    ev.step_evolve(s, V, None, 0.0, 0.1, 1e-3)
    F = ev.random_forcing(stream(1, 2), 1.0, (-2, 2))
    ev.step_evolve(s, None, F, 0.0, 0.1, 1e-3)
    with pytest.raises(ev.StabilityError):
        ev.step_evolve(s, ev.random_potential(stream(1, 1), 1.0, (-4, 4)), None, 0.0, 0.1, 1e-3)


def test_step_size_limit():
    with pytest.raises(ValueError):
        ev.step_evolve(State.delta(LatticeWindow(4)), None, None, 0.0, 1.0, 0.1)


def test_time_grid_ends_on_t1():
    g = ev.time_grid(0.0, 1.0, 0.3)
    assert g[-1] == 1.0 and np.allclose(np.diff(g)[:-1], 0.3)
    assert len(ev.time_grid(0.0, 1.0, 1e-3)) == 1001
    with pytest.raises(ValueError):
        ev.time_grid(1.0, 0.0, 0.1)


def test_trace_with_weight_and_subsample():
    W = LatticeWindow(10)
    tr = ev.step_evolve(State.delta(W), None, None, 0.0, 0.1, 1e-3, weight=EnergyWeight(0.5))
    sub = tr.subsample(30)
    assert sub.times[-1] == tr.times[-1] and len(sub) == 5
    assert sub.log_H[0] == pytest.approx(0.0)
    assert tr.tail_bound.value >= 0


def test_potential_providers():
    V = ev.PotentialProvider.from_sites([0.5, -1.0, 0.25], start=2)
    assert V.support == (2, 4) and V.sup_norm == 1.0
    assert list(V.value(0.0, [1, 2, 3, 4, 5])) == [0.0, 0.5, -1.0, 0.25, 0.0]
    assert list(V.site_values) == [0.5, -1.0, 0.25]
    assert ev.PotentialProvider.from_sites([0, 0]).is_zero
    R = ev.random_potential(stream(3, 1), 2.0, (-5, 5), imag_sup_norm=0.5)
    assert R.spot_check(np.linspace(0, 1, 5), np.arange(-8, 9))
    assert not R.is_real
    again = ev.random_potential(stream(3, 1), 2.0, (-5, 5), imag_sup_norm=0.5)
    assert np.array_equal(R.value(0.3, np.arange(-5, 6)), again.value(0.3, np.arange(-5, 6)))
