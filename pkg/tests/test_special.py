import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from discrete_hardy.special import (
    EnvelopeSpec,
    bessel_tail_log_bound,
    envelope_log,
    heat_kernel,
    log_bessel_i,
    log_bessel_j,
    log_bessel_j_array,
    log_factorial,
)

mpmath.mp.dps = 40


def _mp_log_abs(v):
    return float(mpmath.log(abs(v)))


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 60, 250])
@pytest.mark.parametrize("x", [0.3, 1.0, 2.0, 3.9])
def test_log_bessel_j_against_mpmath(n, x):
    ref = mpmath.besselj(n, x)
    got = log_bessel_j(n, x)
    assert got.sign == (1 if ref > 0 else -1)
    assert got.log_mag == pytest.approx(_mp_log_abs(ref), rel=1e-13, abs=1e-12)


@given(st.integers(-300, 300), st.floats(-4.0, 4.0).filter(lambda x: abs(x) > 1e-3))
def test_log_bessel_i_against_mpmath(n, x):
    # I_{-n} = I_n and I_n(-x) = (-1)^n I_n(x)
    ref = mpmath.besseli(abs(n), abs(x)) * (-1 if x < 0 and n % 2 else 1)
    got = log_bessel_i(n, x)
    assert got.sign == (1 if ref > 0 else -1)
    assert got.log_mag == pytest.approx(_mp_log_abs(ref), rel=1e-12, abs=1e-11)


def test_negative_orders_and_arguments():
    for n in range(-7, 8):
        for x in (-2.5, 1.5):
            assert log_bessel_j(n, x).value == pytest.approx(float(mpmath.besselj(n, x)), rel=1e-13, abs=1e-300)


def test_zero_argument_and_range():
    assert log_bessel_j(0, 0.0).value == 1.0
    assert log_bessel_j(3, 0.0).is_zero
    with pytest.raises(ValueError):
        log_bessel_j(1, 4.5)


def test_far_below_double_range():
    # J_250(2) ~ 1e-493: only the log survives
    v = log_bessel_j(250, 2.0)
    assert v.value == 0.0
    assert v.log_mag == pytest.approx(_mp_log_abs(mpmath.besselj(250, 2)), rel=1e-14)


def test_array_matches_scalar():
    ns = np.arange(-12, 13)
    signs, logs = log_bessel_j_array(ns, 1.0)
    for n, s, lm in zip(ns, signs, logs):
        v = log_bessel_j(int(n), 1.0)
        assert (s, lm) == (v.sign, v.log_mag)


def test_log_factorial():
    assert log_factorial(0) == 0.0
    assert log_factorial(170) == pytest.approx(float(mpmath.log(mpmath.factorial(170))), rel=1e-15)
    with pytest.raises(ValueError):
        log_factorial(-1)


def test_heat_kernel_values():
    assert heat_kernel(0).value == pytest.approx(float(mpmath.exp(-1) * mpmath.besseli(0, 1)), rel=1e-14)
    total = math.fsum(heat_kernel(n).value for n in range(-40, 41))
    assert total == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("n0,x", [(3, 1.0), (10, 2.0), (40, 4.0)])
def test_tail_bound_dominates_true_tail(n0, x):
    true = 2 * mpmath.nsum(lambda n: mpmath.besselj(n, x) ** 2, [n0, mpmath.inf])
    assert bessel_tail_log_bound(n0, x) >= float(mpmath.log(true))


def test_envelopes():
    assert envelope_log(EnvelopeSpec(), 0) == envelope_log(EnvelopeSpec(), 1)
    assert envelope_log(EnvelopeSpec(), 10) == pytest.approx(-0.5 * math.log(10) + 10 * (1 - math.log(20)))
    one = EnvelopeSpec("one_sided", 0.5)
    assert envelope_log(one, 4) == pytest.approx(4 * (1 - math.log(10)))
    with pytest.raises(ValueError):
        envelope_log(one, 0)
    with pytest.raises(ValueError):
        EnvelopeSpec("one_sided", 0.0)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_three_term_recurrence(x):
    vals = {n: log_bessel_j(n, x) for n in range(-301, 302)}
    for n in range(-300, 301):
        # J_{n-1} + J_{n+1} - (2n/x) J_n, scaled by the largest term
        terms = [vals[n - 1], vals[n + 1], vals[n] * (-2.0 * n / x)]
        pivot = max(t.log_mag for t in terms)
        rel = math.fsum(t.sign * math.exp(t.log_mag - pivot) for t in terms)
        assert abs(rel) <= 1e-12


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_normalisation(x):
    assert math.fsum(log_bessel_j(n, x).value ** 2 for n in range(-60, 61)) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("n", [-3, 0, 1, 7])
def test_derivative_identity(n):
    x, h = 1.3, 1e-5
    fd = (log_bessel_j(n, x + h).value - log_bessel_j(n, x - h).value) / (2 * h)
    ident = (log_bessel_j(n - 1, x).value - log_bessel_j(n + 1, x).value) / 2
    assert fd == pytest.approx(ident, abs=1e-9)


@given(st.integers(0, 300), st.sampled_from([0.5, 1.0, 2.0]))
def test_parity(n, x):
    a, b = log_bessel_j(-n, x), log_bessel_j(n, x)
    assert a.sign == (-1) ** n * b.sign and a.log_mag == b.log_mag
    assert log_bessel_i(-n, x) == log_bessel_i(n, x)
