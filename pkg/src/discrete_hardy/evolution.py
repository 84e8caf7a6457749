"""Time evolution of ``du/dt = i (Lap u + V u + F)`` on a lattice window.

Two independent engines:

* closed form for ``V = 0``: ``u(t) = G(t) * u(0)`` with
  ``G(t, n) = exp(-2it) i**n J_n(2t)``.  Substituting ``z = i theta`` in the
  Bessel generating function gives ``sum_n G(t, n) theta**n =
  exp(i t (theta + 1/theta - 2))``, which is the Fourier multiplier of the
  free equation.
* classical RK4 on the window with zero boundary values, for bounded
  time-dependent ``V`` and an optional forcing ``F``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lattice import LatticeWindow, State, laplacian_array, weighted_norm_sq_log
from .logdomain import LogComplex, LogReal, ipow_phase, log_add_complex, logsumexp
from .rng import SplitMix64
from .special import MAX_ARG, bessel_tail_log_bound, log_bessel_j, log_bessel_j_array
from .weights import WeightFamily


class StabilityError(RuntimeError):
    """Norm drift of a conservative run exceeded the allowed tolerance."""


NORM_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class PotentialProvider:
    """Bounded potential ``V(t, n)``.

    ``support`` is ``"all"``, ``"none"`` (V = 0) or a finite ``(lo, hi)``
    range outside of which ``V`` vanishes.  ``imag_sup_norm`` bounds the
    imaginary part; it is 0 for the real potentials of the conservative
    equation.
    """

    func: Callable[[float, np.ndarray], np.ndarray]
    sup_norm: float
    support: str | tuple[int, int] = "all"
    time_dependent: bool = False
    imag_sup_norm: float = 0.0
    name: str = "custom"

    def value(self, t: float, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        if self.support == "none":
            return np.zeros(n.shape)
        v = np.asarray(self.func(t, n))
        if isinstance(self.support, tuple):
            lo, hi = self.support
            v = np.where((n >= lo) & (n <= hi), v, 0.0)
        return v

    @property
    def is_real(self) -> bool:
        return self.imag_sup_norm == 0.0

    @property
    def is_zero(self) -> bool:
        return self.support == "none"

    def spot_check(self, times, sites, slack: float = 1e-12) -> bool:
        for t in times:
            v = self.value(t, sites)
            if np.any(np.abs(v) > self.sup_norm + slack):
                return False
            if np.any(np.abs(np.imag(v)) > self.imag_sup_norm + slack):
                return False
        return True

    @classmethod
    def zero(cls) -> "PotentialProvider":
        return cls(lambda t, n: np.zeros(np.shape(n)), 0.0, "none", False, 0.0, "zero")

    @classmethod
    def from_sites(cls, values, start: int = 0) -> "PotentialProvider":
        """Static potential with ``V(start + k) = values[k]``."""
        vals = np.asarray(values, dtype=float)
        if vals.size == 0 or not np.any(vals):
            return cls.zero()
        lo, hi = int(start), int(start) + vals.size - 1

        def func(t, n):
            idx = np.clip(n - lo, 0, vals.size - 1)
            return vals[idx]

        return cls(func, float(np.max(np.abs(vals))), (lo, hi), False, 0.0, "sites")

    @property
    def site_values(self) -> np.ndarray:
        """Values on the finite support of a static potential."""
        if self.support == "none":
            return np.zeros(0)
        if not isinstance(self.support, tuple) or self.time_dependent:
            raise ValueError("site values need a static finite-support potential")
        lo, hi = self.support
        return np.asarray(self.value(0.0, np.arange(lo, hi + 1)), dtype=float)


def random_potential(
    rng: SplitMix64,
    sup_norm: float,
    sites: tuple[int, int],
    time_dependent: bool = True,
    imag_sup_norm: float = 0.0,
    finite_support: bool = False,
) -> PotentialProvider:
    """Seeded potential on ``sites = (lo, hi)``.

    Site amplitudes are i.i.d. uniform in ``[-sup_norm, sup_norm]``; a
    time-dependent potential modulates each site by ``cos(omega t + phi)``
    with uniform ``omega in [0, 2 pi]``, ``phi in [0, 2 pi)``.  The imaginary
    part, if requested, is static and uniform in ``[-imag_sup_norm, imag_sup_norm]``.
    """
    lo, hi = sites
    k = hi - lo + 1
    amp = rng.uniform(-sup_norm, sup_norm, k)
    omega = rng.uniform(0.0, 2 * math.pi, k) if time_dependent else np.zeros(k)
    phi = rng.uniform(0.0, 2 * math.pi, k) if time_dependent else np.zeros(k)
    imag = rng.uniform(-imag_sup_norm, imag_sup_norm, k) if imag_sup_norm > 0 else None

    def func(t, n):
        idx = np.clip(np.asarray(n) - lo, 0, k - 1)
        inside = (np.asarray(n) >= lo) & (np.asarray(n) <= hi)
        v = amp[idx] * np.cos(omega[idx] * t + phi[idx]) if time_dependent else amp[idx]
        v = np.where(inside, v, 0.0)
        if imag is not None:
            v = v + 1j * np.where(inside, imag[idx], 0.0)
        return v

    return PotentialProvider(
        func,
        float(math.hypot(sup_norm, imag_sup_norm)),
        (lo, hi) if finite_support else "all",
        time_dependent,
        float(imag_sup_norm),
        "random",
    )


@dataclass(frozen=True)
class ForcingProvider:
    func: Callable[[float, np.ndarray], np.ndarray]
    sup_norm: float
    name: str = "custom"

    def value(self, t: float, n) -> np.ndarray:
        return np.asarray(self.func(t, np.asarray(n, dtype=np.int64)), dtype=complex)


def random_forcing(rng: SplitMix64, sup_norm: float, sites: tuple[int, int]) -> ForcingProvider:
    """``F(t, n) = r_n exp(i (omega_n t + phi_n))`` on ``sites``, zero elsewhere."""
    lo, hi = sites
    k = hi - lo + 1
    r = rng.uniform(0.0, sup_norm, k)
    omega = rng.uniform(0.0, 2 * math.pi, k)
    phi = rng.uniform(0.0, 2 * math.pi, k)

    def func(t, n):
        idx = np.clip(n - lo, 0, k - 1)
        inside = (n >= lo) & (n <= hi)
        return np.where(inside, r[idx] * np.exp(1j * (omega[idx] * t + phi[idx])), 0.0)

    return ForcingProvider(func, float(sup_norm), "random")


# ---------------------------------------------------------------- closed form


def free_kernel(t: float, n: int) -> LogComplex:
    """``G(t, n) = exp(-2it) i**n J_n(2t)`` in log domain (``|t| <= 2``)."""
    j = log_bessel_j(n, 2.0 * t)
    if j.is_zero:
        return LogComplex.zero()
    phase = -2.0 * t + ipow_phase(n) + (math.pi if j.sign < 0 else 0.0)
    return LogComplex(j.log_mag, phase)


def free_kernel_array(t: float, ns) -> tuple[np.ndarray, np.ndarray]:
    ns = np.asarray(ns, dtype=np.int64)
    signs, logs = log_bessel_j_array(ns, 2.0 * t)
    phase = -2.0 * t + ipow_phase(ns) + np.where(signs < 0, math.pi, 0.0)
    return logs, phase


def _kernel_tail_logs(t: float, d_max: int) -> np.ndarray:
    """``log sum_{j >= d} J_j(2t)^2`` for ``d = 0 .. d_max`` (one side)."""
    x = 2.0 * t
    j_last = d_max + 8
    _, logs = log_bessel_j_array(np.arange(j_last + 1), x)
    sq = 2.0 * logs
    rest = bessel_tail_log_bound(j_last + 1, x)
    acc = np.empty(j_last + 2)
    acc[-1] = rest
    for j in range(j_last, -1, -1):
        acc[j] = np.logaddexp(acc[j + 1], sq[j])
    return acc[: d_max + 1]


def _free_evolve_once(s: State, t: float) -> State:
    N = s.window.half_width
    idx = s.indices
    offsets = np.arange(-2 * N, 2 * N + 1)
    glog, gphase = free_kernel_array(t, offsets)
    # out(m) = sum_k G(m - k) s(k)
    diff = idx[:, None] - idx[None, :] + 2 * N
    logs = glog[diff] + s.log_mag[None, :]
    phases = gphase[diff] + s.phase[None, :]
    out_log, out_phase = log_add_complex(logs, phases, axis=1)

    # mass pushed beyond the window by site k: J_j(2t) for j > N-k and j < -N-k
    tails = _kernel_tail_logs(t, 2 * N + 1)
    right = tails[np.clip(N - idx + 1, 0, 2 * N + 1)]
    left = tails[np.clip(N + idx + 1, 0, 2 * N + 1)]
    per_site = s.log_mag + 0.5 * np.logaddexp(right, left)
    leak = LogReal.from_log(logsumexp(per_site))
    return State(s.window, out_log, out_phase, s.tail_bound + leak)


def free_evolve(s: State, t: float) -> State:
    """Free evolution by windowed convolution with :func:`free_kernel`."""
    t = float(t)
    if t == 0.0:
        return s
    chunks = max(1, math.ceil(abs(t) / (MAX_ARG / 2.0)))
    out = s
    for _ in range(chunks):
        out = _free_evolve_once(out, t / chunks)
    return out


def extremizer(t: float, A: complex, window: LatticeWindow) -> State:
    """``u(t, n) = A i**(-n) exp(-2it) J_n(1 - 2t)`` on ``window``."""
    ns = window.indices
    signs, logs = log_bessel_j_array(ns, 1.0 - 2.0 * t)
    if A == 0:
        return State.zeros(window)
    phase = (
        math.atan2(complex(A).imag, complex(A).real)
        - ipow_phase(ns)
        - 2.0 * t
        + np.where(signs < 0, math.pi, 0.0)
    )
    log_a = math.log(abs(A))
    tail = LogReal.from_log(log_a + 0.5 * bessel_tail_log_bound(window.half_width + 1, 1.0 - 2.0 * t))
    return State(window, logs + log_a, phase, tail)


def extremizer_time_derivative(t: float, A: complex, window: LatticeWindow) -> np.ndarray:
    """Analytic ``du/dt`` of the extremizer via ``J_n' = (J_{n-1} - J_{n+1}) / 2``."""
    ns = window.indices
    x = 1.0 - 2.0 * t

    def jv(orders):
        s, l = log_bessel_j_array(orders, x)
        with np.errstate(under="ignore"):
            return s * np.exp(l)

    j0, jm, jp = jv(ns), jv(ns - 1), jv(ns + 1)
    pref = A * np.exp(-1j * (ipow_phase(ns) + 2.0 * t))
    # d/dt [e^{-2it} J_n(1-2t)] = -2i e^{-2it} J_n - 2 e^{-2it} J_n'
    return pref * (-2j * j0 - (jm - jp))


# ------------------------------------------------------------- time stepping


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    window: LatticeWindow
    times: np.ndarray
    amplitudes: np.ndarray
    norms: np.ndarray
    log_H: np.ndarray | None = None
    weight: WeightFamily | None = None
    tail_bound: LogReal = field(default_factory=LogReal.zero)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trace times must be strictly increasing")
        if self.amplitudes.shape != (len(self.times), self.window.size):
            raise ValueError("one state per time on a common window is required")

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> State:
        return State.from_amplitudes(self.window, self.amplitudes[i], self.tail_bound)

    @property
    def final(self) -> State:
        return self.state(len(self.times) - 1)

    def subsample(self, stride: int) -> "EvolutionTrace":
        keep = np.arange(0, len(self.times), stride)
        if keep[-1] != len(self.times) - 1:
            keep = np.append(keep, len(self.times) - 1)
        return EvolutionTrace(
            self.window,
            self.times[keep],
            self.amplitudes[keep],
            self.norms[keep],
            None if self.log_H is None else self.log_H[keep],
            self.weight,
            self.tail_bound,
        )


def time_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    """``t0, t0+dt, ...`` with the last step shortened to end exactly at ``t1``."""
    if not dt > 0 or not t1 > t0:
        raise ValueError("need dt > 0 and t1 > t0")
    k = math.floor((t1 - t0) / dt + 1e-9)
    grid = t0 + dt * np.arange(k + 1)
    if t1 - grid[-1] > 1e-12 * max(1.0, abs(t1)):
        grid = np.append(grid, t1)
    else:
        grid[-1] = t1
    return grid


def max_stable_dt(V: PotentialProvider) -> float:
    return 0.1 / (4.0 + V.sup_norm)


def step_evolve(
    s: State,
    V: PotentialProvider | None,
    F: ForcingProvider | None,
    t0: float,
    t1: float,
    dt: float,
    weight: WeightFamily | None = None,
    check_norm: bool = True,
) -> EvolutionTrace:
    """RK4 integration of ``du/dt = i (Lap u + V u + F)`` on the window of ``s``.

    Raises :class:`StabilityError` if a conservative run (real ``V``, no ``F``)
    drifts in norm by more than ``NORM_DRIFT_LIMIT``.
    """
    V = V or PotentialProvider.zero()
    if dt > max_stable_dt(V) * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds the stability limit {max_stable_dt(V):.3g}")
    times = time_grid(t0, t1, dt)
    ns = s.indices
    zero_v = V.is_zero

    def rhs(t, u):
        du = laplacian_array(u)
        if not zero_v:
            du = du + V.value(t, ns) * u
        if F is not None:
            du = du + F.value(t, ns)
        return 1j * du

    u = s.amplitudes.astype(complex)
    states = np.empty((len(times), len(ns)), dtype=complex)
    states[0] = u
    for k in range(1, len(times)):
        t, h = times[k - 1], times[k] - times[k - 1]
        k1 = rhs(t, u)
        k2 = rhs(t + h / 2, u + (h / 2) * k1)
        k3 = rhs(t + h / 2, u + (h / 2) * k2)
        k4 = rhs(t + h, u + h * k3)
        u = u + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k] = u

    norms = np.linalg.norm(states, axis=1)
    if check_norm and F is None and V.is_real:
        drift = float(np.max(np.abs(norms - norms[0])))
        if drift > NORM_DRIFT_LIMIT:
            raise StabilityError(f"norm drifted by {drift:.3e} over [{t0}, {t1}]")

    # Duhamel: the zero-boundary solution differs from the one on Z by at most
    # the integrated amplitude at the two edge sites (times the non-unitary growth).
    edge = np.hypot(np.abs(states[:, 0]), np.abs(states[:, -1]))
    growth = math.exp(V.imag_sup_norm * (t1 - t0))
    leak = float(np.max(edge)) * (t1 - t0) * growth
    tail = s.tail_bound * growth + LogReal.from_float(leak)

    log_H = None
    if weight is not None:
        log_H = np.array(
            [weighted_norm_sq_log(State.from_amplitudes(s.window, states[i]), weight, times[i]) for i in range(len(times))]
        )
    return EvolutionTrace(s.window, times, states, norms, log_H, weight, tail)


def residual(
    s_fn: Callable[[float], State],
    V: PotentialProvider | None,
    t: float,
    derivative: Callable[[float], np.ndarray] | None = None,
    h: float = 1e-5,
) -> float:
    """``max_n |du/dt - i (Lap u + V u)|`` over the window at time ``t``."""
    s = s_fn(t)
    u = s.amplitudes
    if derivative is not None:
        du = np.asarray(derivative(t))
    else:
        du = (s_fn(t + h).amplitudes - s_fn(t - h).amplitudes) / (2 * h)
    rhs = laplacian_array(u)
    if V is not None and not V.is_zero:
        rhs = rhs + V.value(t, s.indices) * u
    if u.size == 0:
        return 0.0
    return float(np.max(np.abs(du - 1j * rhs)))

