"""Signed and phased log-magnitude scalars.

Magnitudes such as ``(e / 2n)**n`` or ``(1 + n)**(gamma * (1 + n))`` leave the
range of IEEE doubles long before the lattice indices we care about do, so
every such quantity is carried as ``log|x|`` plus a sign (reals) or a phase
(complex numbers).

Sums factor out the largest log-magnitude and add the residuals in the linear
domain.  A residual more than ``UNDERFLOW_LOG`` below the pivot cannot change
the result and is dropped; :class:`LogAccumulator` keeps a tally of what was
dropped so that callers can certify it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

NEG_INF = float("-inf")
# exp(-745) is the smallest subnormal double.
UNDERFLOW_LOG = -745.0
TWO_PI = 2.0 * math.pi


def normalize_phase(phase):
    """Map angles into (-pi, pi].  Works on scalars and arrays."""
    if np.ndim(phase) == 0:
        p = math.remainder(float(phase), TWO_PI)
        return math.pi if p <= -math.pi else p
    p = np.remainder(np.asarray(phase, dtype=float), TWO_PI)
    p = np.where(p > math.pi, p - TWO_PI, p)
    return np.where(p <= -math.pi, math.pi, p)


_IPOW_PHASE = (0.0, math.pi / 2, math.pi, -math.pi / 2)


def ipow_phase(n):
    """Phase of ``1j**n``, read off ``n mod 4`` (never by repeated products)."""
    if np.ndim(n) == 0:
        return _IPOW_PHASE[int(n) % 4]
    return np.take(np.asarray(_IPOW_PHASE), np.mod(np.asarray(n, dtype=np.int64), 4))


def logsumexp(logs: Iterable[float]) -> float:
    """``log(sum(exp(logs)))`` with an order-independent (exactly rounded) sum."""
    x = np.asarray(list(logs) if not isinstance(logs, np.ndarray) else logs, dtype=float)
    if x.size == 0:
        return NEG_INF
    m = float(np.max(x))
    if m == NEG_INF:
        return NEG_INF
    if math.isinf(m):
        return m
    return m + math.log(math.fsum(np.exp(x - m).tolist()))


def log_add_complex(logs, phases, axis=-1):
    """Vectorised complex log-sum-exp along ``axis``.

    Returns ``(log_mag, phase)`` of ``sum(exp(logs + 1j*phases))``.  Reduction
    order is the fixed array order, so results are deterministic.
    """
    logs = np.asarray(logs, dtype=float)
    phases = np.asarray(phases, dtype=float)
    pivot = np.max(logs, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(pivot), pivot, 0.0)
    with np.errstate(under="ignore"):
        terms = np.exp(logs - safe) * np.exp(1j * phases)
    total = np.sum(terms, axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out_log = np.log(np.abs(total)) + safe
    out_log = np.where(np.isneginf(pivot), NEG_INF, out_log)
    out_phase = np.where(np.isfinite(out_log), np.angle(total), 0.0)
    out_phase = normalize_phase(out_phase)
    return np.squeeze(out_log, axis=axis), np.squeeze(out_phase, axis=axis)


@dataclass(frozen=True)
class LogReal:
    """A real number stored as ``sign * exp(log_mag)``."""

    sign: int
    log_mag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        if (self.sign == 0) != (self.log_mag == NEG_INF):
            raise ValueError("sign == 0 exactly when log_mag == -inf")

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(0, NEG_INF)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(1, 0.0)

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x == 0.0:
            return cls.zero()
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_mag: float, sign: int = 1) -> "LogReal":
        if log_mag == NEG_INF:
            return cls.zero()
        return cls(sign, float(log_mag))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def value(self) -> float:
        """Linear value; may overflow to inf or underflow to 0."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_mag)
        except OverflowError:
            return self.sign * math.inf

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "LogReal":
        return LogReal(-self.sign, self.log_mag)

    def __abs__(self) -> "LogReal":
        return LogReal(abs(self.sign), self.log_mag)

    def __mul__(self, other) -> "LogReal":
        other = _as_logreal(other)
        if self.sign == 0 or other.sign == 0:
            return LogReal.zero()
        return LogReal(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogReal":
        other = _as_logreal(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogReal")
        if self.sign == 0:
            return LogReal.zero()
        return LogReal(self.sign * other.sign, self.log_mag - other.log_mag)

    def __add__(self, other) -> "LogReal":
        other = _as_logreal(other)
        if other.sign == 0:
            return self
        if self.sign == 0:
            return other
        big, small = (self, other) if self.log_mag >= other.log_mag else (other, self)
        diff = small.log_mag - big.log_mag
        if diff < UNDERFLOW_LOG:
            return big
        r = math.exp(diff)
        if big.sign == small.sign:
            return LogReal(big.sign, big.log_mag + math.log1p(r))
        if r == 1.0:
            return LogReal.zero()
        return LogReal(big.sign, big.log_mag + math.log1p(-r))

    __radd__ = __add__

    def __sub__(self, other) -> "LogReal":
        return self + (-_as_logreal(other))

    def __rsub__(self, other) -> "LogReal":
        return _as_logreal(other) + (-self)

    def sqrt(self) -> "LogReal":
        if self.sign < 0:
            raise ValueError("square root of a negative LogReal")
        return LogReal.from_log(0.5 * self.log_mag)

    def __pow__(self, p: float) -> "LogReal":
        if self.sign == 0:
            return LogReal.zero() if p > 0 else LogReal.one()
        if self.sign < 0 and float(p) != int(p):
            raise ValueError("non-integer power of a negative LogReal")
        sign = -1 if (self.sign < 0 and int(p) % 2) else 1
        return LogReal(sign, p * self.log_mag)

    def __lt__(self, other) -> bool:
        return _signed_key(self) < _signed_key(_as_logreal(other))

    def __le__(self, other) -> bool:
        return _signed_key(self) <= _signed_key(_as_logreal(other))

    def __gt__(self, other) -> bool:
        return _signed_key(self) > _signed_key(_as_logreal(other))

    def __ge__(self, other) -> bool:
        return _signed_key(self) >= _signed_key(_as_logreal(other))


def _signed_key(x: LogReal):
    if x.sign == 0:
        return (0, 0.0)
    return (x.sign, x.sign * x.log_mag)


def _as_logreal(x) -> LogReal:
    if isinstance(x, LogReal):
        return x
    return LogReal.from_float(float(x))


@dataclass(frozen=True)
class LogComplex:
    """A complex number stored as ``exp(log_mag) * exp(1j * phase)``."""

    log_mag: float
    phase: float = 0.0

    def __post_init__(self):
        if self.log_mag == NEG_INF:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", normalize_phase(self.phase))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(NEG_INF, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @classmethod
    def from_logreal(cls, x: LogReal) -> "LogComplex":
        if x.sign == 0:
            return cls.zero()
        return cls(x.log_mag, 0.0 if x.sign > 0 else math.pi)

    @property
    def is_zero(self) -> bool:
        return self.log_mag == NEG_INF

    @property
    def value(self) -> complex:
        if self.is_zero:
            return 0j
        try:
            r = math.exp(self.log_mag)
        except OverflowError:
            r = math.inf
        return complex(r * math.cos(self.phase), r * math.sin(self.phase))

    def __complex__(self) -> complex:
        return self.value

    def __abs__(self) -> LogReal:
        return LogReal.from_log(self.log_mag)

    def conjugate(self) -> "LogComplex":
        return LogComplex(self.log_mag, -self.phase)

    def __neg__(self) -> "LogComplex":
        return LogComplex(self.log_mag, self.phase + math.pi)

    def __mul__(self, other) -> "LogComplex":
        other = _as_logcomplex(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogComplex":
        other = _as_logcomplex(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogComplex")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)

    def __add__(self, other) -> "LogComplex":
        acc = LogAccumulator()
        acc.add(self)
        acc.add(_as_logcomplex(other))
        return acc.total()

    __radd__ = __add__

    def __sub__(self, other) -> "LogComplex":
        return self + (-_as_logcomplex(other))


def _as_logcomplex(z) -> LogComplex:
    if isinstance(z, LogComplex):
        return z
    if isinstance(z, LogReal):
        return LogComplex.from_logreal(z)
    return LogComplex.from_complex(complex(z))


@dataclass
class LogAccumulator:
    """Sum of LogComplex terms with a tally of dropped residuals.

    Owned by one caller; never shared.  ``dropped`` bounds the magnitude of
    everything discarded because it sat below the pivot by more than
    ``UNDERFLOW_LOG``.
    """

    terms: list = field(default_factory=list)
    dropped: LogReal = field(default_factory=LogReal.zero)

    def add(self, z) -> None:
        z = _as_logcomplex(z)
        if not z.is_zero:
            self.terms.append(z)

    def total(self) -> LogComplex:
        if not self.terms:
            return LogComplex.zero()
        logs = np.array([z.log_mag for z in self.terms])
        phases = np.array([z.phase for z in self.terms])
        pivot = float(np.max(logs))
        keep = logs - pivot >= UNDERFLOW_LOG
        if not np.all(keep):
            self.dropped = self.dropped + LogReal.from_log(logsumexp(logs[~keep]))
        rel = np.exp(logs[keep] - pivot)
        re = math.fsum((rel * np.cos(phases[keep])).tolist())
        im = math.fsum((rel * np.sin(phases[keep])).tolist())
        if re == 0.0 and im == 0.0:
            return LogComplex.zero()
        return LogComplex(pivot + math.log(math.hypot(re, im)), math.atan2(im, re))
