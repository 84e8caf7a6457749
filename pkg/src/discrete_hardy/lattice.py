"""Truncated-lattice states and the operators acting on them.

A :class:`State` lives on a symmetric window ``[-N, N]`` and stores every
amplitude as ``(log|u|, arg u)``.  Sites with ``log|u| = -inf`` are exact
zeros.  Indices outside the window are treated as zero; whatever mass the
underlying solution on Z carries there is accounted for by ``tail_bound``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .logdomain import NEG_INF, LogReal, log_add_complex, logsumexp, normalize_phase
from .weights import WeightFamily


@dataclass(frozen=True)
class LatticeWindow:
    """Index set ``[-half_width, half_width]``; ``half_width = 0`` is the single site 0."""

    half_width: int

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 0:
            raise ValueError(f"half_width must be a non-negative integer, got {self.half_width}")
        object.__setattr__(self, "half_width", int(self.half_width))

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def position(self, n: int) -> int:
        if abs(n) > self.half_width:
            raise IndexError(f"site {n} outside window of half width {self.half_width}")
        return n + self.half_width

    def __contains__(self, n) -> bool:
        return abs(int(n)) <= self.half_width


@dataclass(frozen=True, eq=False)
class State:
    window: LatticeWindow
    log_mag: np.ndarray
    phase: np.ndarray
    tail_bound: LogReal = field(default_factory=LogReal.zero)

    def __post_init__(self):
        log_mag = np.array(self.log_mag, dtype=float)
        phase = np.array(self.phase, dtype=float)
        if log_mag.shape != (self.window.size,) or phase.shape != (self.window.size,):
            raise ValueError(
                f"expected {self.window.size} amplitudes, got {log_mag.shape} / {phase.shape}"
            )
        if np.any(np.isnan(log_mag)) or np.any(log_mag == np.inf):
            raise ValueError("log magnitudes must be finite or -inf")
        if self.tail_bound.sign < 0:
            raise ValueError("tail bound must be non-negative")
        phase = np.where(np.isneginf(log_mag), 0.0, normalize_phase(phase))
        log_mag.flags.writeable = False
        phase.flags.writeable = False
        object.__setattr__(self, "log_mag", log_mag)
        object.__setattr__(self, "phase", phase)

    @classmethod
    def from_amplitudes(cls, window: LatticeWindow, amplitudes, tail_bound: LogReal | None = None) -> "State":
        a = np.asarray(amplitudes, dtype=complex)
        with np.errstate(divide="ignore"):
            log_mag = np.log(np.abs(a))
        return cls(window, log_mag, np.angle(a), tail_bound or LogReal.zero())

    @classmethod
    def zeros(cls, window: LatticeWindow) -> "State":
        return cls(window, np.full(window.size, NEG_INF), np.zeros(window.size))

    @classmethod
    def delta(cls, window: LatticeWindow, site: int = 0, value: complex = 1.0) -> "State":
        a = np.zeros(window.size, dtype=complex)
        a[window.position(site)] = value
        return cls.from_amplitudes(window, a)

    @property
    def indices(self) -> np.ndarray:
        return self.window.indices

    @property
    def amplitudes(self) -> np.ndarray:
        """Linear amplitudes; entries below the double range read as 0."""
        with np.errstate(under="ignore", over="ignore"):
            return np.exp(self.log_mag) * np.exp(1j * self.phase)

    def __len__(self) -> int:
        return self.window.size

    def __getitem__(self, n: int) -> complex:
        k = self.window.position(n)
        return complex(np.exp(self.log_mag[k]) * np.exp(1j * self.phase[k]))

    def with_tail(self, tail_bound: LogReal) -> "State":
        return State(self.window, self.log_mag, self.phase, tail_bound)

    def scaled(self, c: complex) -> "State":
        if c == 0:
            return State.zeros(self.window)
        return State(
            self.window,
            self.log_mag + math.log(abs(c)),
            self.phase + math.atan2(complex(c).imag, complex(c).real),
            self.tail_bound * abs(c),
        )


def laplacian_array(u: np.ndarray) -> np.ndarray:
    """``u(n+1) + u(n-1) - 2 u(n)`` with zeros outside the array."""
    out = -2.0 * u
    out[:-1] += u[1:]
    out[1:] += u[:-1]
    return out


def laplacian(s: State) -> State:
    """Discrete Laplacian evaluated entirely in log domain."""
    pad_l = np.concatenate(([NEG_INF], s.log_mag, [NEG_INF]))
    pad_p = np.concatenate(([0.0], s.phase, [0.0]))
    logs = np.stack([pad_l[2:], pad_l[:-2], s.log_mag + math.log(2.0)])
    phases = np.stack([pad_p[2:], pad_p[:-2], s.phase + math.pi])
    out_log, out_phase = log_add_complex(logs, phases, axis=0)
    return State(s.window, out_log, out_phase, s.tail_bound * 4.0)


def l2_norm(s: State) -> LogReal:
    """``(sum |u(n)|^2)^(1/2)`` over the window, in log domain."""
    return LogReal.from_log(0.5 * logsumexp(2.0 * s.log_mag))


def weighted_norm_sq_log(s: State, w: WeightFamily, t: float) -> float:
    """``log sum psi(t,n)^2 |u(n)|^2``; the weight is never exponentiated."""
    x = 2.0 * np.asarray(w.kappa(t, s.indices)) + 2.0 * s.log_mag
    out = logsumexp(x)
    if out == math.inf:
        raise OverflowError("weighted norm overflowed in log domain")
    return out


def inner(s1: State, s2: State) -> complex:
    """Linear-domain inner product ``sum s1(n) conj(s2(n))``."""
    if s1.window != s2.window:
        raise ValueError("states live on different windows")
    return complex(np.vdot(s2.amplitudes, s1.amplitudes))


def l2_distance(s1: State, s2: State) -> float:
    if s1.window != s2.window:
        raise ValueError("states live on different windows")
    return float(np.linalg.norm(s1.amplitudes - s2.amplitudes))
