import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from discrete_hardy.logdomain import (
    NEG_INF,
    LogAccumulator,
    LogComplex,
    LogReal,
    ipow_phase,
    log_add_complex,
    logsumexp,
    normalize_phase,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda x: abs(x) > 1e-300 or x == 0)


def test_logreal_invariants():
    with pytest.raises(ValueError):
        LogReal(0, 1.0)
    with pytest.raises(ValueError):
        LogReal(1, NEG_INF)
    with pytest.raises(ValueError):
        LogReal(2, 0.0)
    assert LogReal.from_float(0.0).is_zero
    assert LogReal.from_log(NEG_INF).is_zero


@given(finite, finite)
def test_logreal_arithmetic_matches_floats(a, b):
    x, y = LogReal.from_float(a), LogReal.from_float(b)
    assert (x * y).value == pytest.approx(a * b, rel=1e-12, abs=0)
    scale = max(abs(a), abs(b), 1e-300)
    assert abs((x + y).value - (a + b)) <= 1e-12 * scale
    assert abs((x - y).value - (a - b)) <= 1e-12 * scale
    assert (x < y) == (a < b)
    assert (x >= y) == (a >= b)


def test_logreal_beyond_double_range():
    big = LogReal.from_log(5000.0)
    assert big.value == math.inf
    assert (big * big).log_mag == 10000.0
    assert (big / big).value == pytest.approx(1.0)
    assert (big - big).is_zero
    # 1 + 1e-400 stays 1; the small term is below the pivot
    assert (LogReal.one() + LogReal.from_log(-921.0)).value == 1.0


def test_logreal_sqrt_pow():
    assert LogReal.from_float(9.0).sqrt().value == pytest.approx(3.0)
    assert (LogReal.from_float(-2.0) ** 3).value == pytest.approx(-8.0)
    with pytest.raises(ValueError):
        LogReal.from_float(-2.0).sqrt()
    with pytest.raises(ZeroDivisionError):
        LogReal.one() / LogReal.zero()


@given(st.lists(st.floats(-700, 700), min_size=1, max_size=30))
def test_logsumexp_against_direct(xs):
    direct = math.log(math.fsum(math.exp(x) for x in xs))
    assert logsumexp(xs) == pytest.approx(direct, rel=1e-12, abs=1e-12)


def test_logsumexp_edge_cases():
    assert logsumexp([]) == NEG_INF
    assert logsumexp([NEG_INF, NEG_INF]) == NEG_INF
    assert logsumexp([1e4, 1e4]) == pytest.approx(1e4 + math.log(2))


@given(st.floats(-1e3, 1e3))
def test_normalize_phase_range(p):
    q = normalize_phase(p)
    assert -math.pi < q <= math.pi
    assert math.cos(q) == pytest.approx(math.cos(p), abs=1e-9)


def test_ipow_phase():
    for n in range(-9, 10):
        assert np.exp(1j * ipow_phase(n)) == pytest.approx(1j**n, abs=1e-15)


@given(st.complex_numbers(max_magnitude=1e100, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=1e100, allow_nan=False, allow_infinity=False))
def test_logcomplex_round_trip_and_product(z, w):
    Z, W = LogComplex.from_complex(z), LogComplex.from_complex(w)
    assert Z.value == pytest.approx(z, rel=1e-12, abs=1e-300)
    assert (Z * W).value == pytest.approx(z * w, rel=1e-12, abs=1e-300)


def test_log_add_complex_cancellation():
    lm, ph = log_add_complex(np.array([0.0, 0.0]), np.array([0.0, math.pi]))
    # exp(i*pi) carries a 1e-16 imaginary rounding residue
    assert lm < -35.0
    lm, ph = log_add_complex(np.array([800.0, 800.0]), np.array([0.0, math.pi / 2]))
    assert lm == pytest.approx(800.0 + 0.5 * math.log(2.0))
    assert ph == pytest.approx(math.pi / 4)


def test_accumulator_tracks_dropped_terms():
    acc = LogAccumulator()
    acc.add(LogComplex(0.0))
    acc.add(LogComplex(-800.0))
    acc.add(0.0)
    assert acc.total().value == pytest.approx(1.0)
    assert acc.dropped.log_mag == pytest.approx(-800.0)
