"""Integer-order Bessel functions, the lattice heat kernel and decay envelopes.

Everything is returned in log domain.  For ``|x| <= 4`` the ascending series

    J_n(x) = (x/2)**n / n! * sum_k (-(x/2)**2)**k * n! / (k! (n+k)!)

converges fast enough that no asymptotic branch is needed: the leading factor
is taken in log domain and the bracketed sum is accumulated in linear domain
relative to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .logdomain import NEG_INF, LogReal

MAX_ARG = 4.0
_SERIES_RTOL = 1e-20


@lru_cache(maxsize=4096)
def log_factorial(n: int) -> float:
    """``log(n!)``, correctly rounded via the exact integer factorial."""
    if n < 0:
        raise ValueError("factorial of a negative integer")
    return math.log(math.factorial(n))


def _series_sum(m: int, q: float, alternating: bool) -> float:
    # sum_k (+-q)^k * m! / (k! (m+k)!), terms updated by exact ratios
    sign = -1.0 if alternating else 1.0
    term = 1.0
    terms = [term]
    k = 0
    while True:
        term *= sign * q / ((k + 1) * (m + k + 1))
        k += 1
        terms.append(term)
        if abs(term) < _SERIES_RTOL * abs(math.fsum(terms)) or term == 0.0:
            break
    return math.fsum(terms)


def _check_arg(x: float) -> float:
    x = float(x)
    if not abs(x) <= MAX_ARG:
        raise ValueError(f"|x| must be <= {MAX_ARG}, got {x}")
    return x


def _log_bessel(n: int, x: float, alternating: bool) -> LogReal:
    m = abs(int(n))
    if x == 0.0:
        return LogReal.one() if m == 0 else LogReal.zero()
    half = abs(x) / 2.0
    s = _series_sum(m, half * half, alternating)
    if s == 0.0:
        return LogReal.zero()
    log_mag = m * math.log(half) - log_factorial(m) + math.log(abs(s))
    sign = 1 if s > 0 else -1
    # x -> -x flips odd orders for both J and I
    if x < 0 and m % 2:
        sign = -sign
    # J_{-m} = (-1)^m J_m ; I_{-m} = I_m
    if alternating and n < 0 and m % 2:
        sign = -sign
    return LogReal(sign, log_mag)


def log_bessel_j(n: int, x: float) -> LogReal:
    """Sign and log-magnitude of ``J_n(x)`` for ``|x| <= 4``."""
    return _log_bessel(n, _check_arg(x), alternating=True)


def log_bessel_i(n: int, x: float) -> LogReal:
    """Log of the modified Bessel function ``I_n(x)`` for ``|x| <= 4``."""
    return _log_bessel(n, _check_arg(x), alternating=False)


def log_bessel_j_array(ns, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Vector of ``(sign, log|J_n(x)|)`` over integer orders ``ns``."""
    x = _check_arg(x)
    ns = np.asarray(ns, dtype=np.int64)
    signs = np.zeros(ns.shape, dtype=np.int8)
    logs = np.full(ns.shape, NEG_INF)
    cache: dict[int, LogReal] = {}
    for idx, n in np.ndenumerate(ns):
        m = abs(int(n))
        if m not in cache:
            cache[m] = log_bessel_j(m, x)
        v = cache[m]
        sign = v.sign
        if n < 0 and m % 2:
            sign = -sign
        signs[idx] = sign
        logs[idx] = v.log_mag
    return signs, logs


def heat_kernel(n: int) -> LogReal:
    """Discrete heat kernel at unit time, ``exp(-1) * I_n(1)``."""
    v = log_bessel_i(n, 1.0)
    return LogReal(v.sign, v.log_mag - 1.0)


def bessel_tail_log_bound(n0: int, x: float) -> float:
    """Log of an upper bound on ``sum_{|n| >= n0} J_n(x)**2``.

    Uses ``|J_n(x)| <= (|x|/2)**n / n!`` and a geometric majorant for the
    ratio of consecutive squared terms.
    """
    n0 = max(int(n0), 0)
    half = abs(float(x)) / 2.0
    if half == 0.0:
        return 0.0 if n0 == 0 else NEG_INF
    q = (half / (n0 + 1)) ** 2
    if q >= 1.0:
        # no useful bound below the normalisation sum_n J_n^2 = 1
        return 0.0
    lead = 2.0 * (n0 * math.log(half) - log_factorial(n0))
    # two sides, geometric series 1/(1-q)
    return math.log(2.0) + lead - math.log1p(-q)


@dataclass(frozen=True)
class EnvelopeSpec:
    """Decay envelope used by the uniqueness statements.

    ``kind="hardy"``: ``|n|**-0.5 * (e / (2|n|))**|n|``, extended to ``n = 0``
    by its value at ``|n| = 1``.
    ``kind="one_sided"``: ``(e / ((2 + eps) n))**n`` for ``n > 0`` only.
    """

    kind: str = "hardy"
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("hardy", "one_sided"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.kind == "one_sided" and not self.eps > 0:
            raise ValueError("one-sided envelope needs eps > 0")


def envelope_log(spec: EnvelopeSpec, n: int) -> float:
    """Natural log of the envelope at ``n``."""
    n = int(n)
    if spec.kind == "hardy":
        m = max(abs(n), 1)
        return -0.5 * math.log(m) + m * (1.0 - math.log(2.0 * m))
    if n <= 0:
        raise ValueError("one-sided envelope is defined for n > 0 only")
    return n * (1.0 - math.log((2.0 + spec.eps) * n))
