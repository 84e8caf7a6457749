"""Jost solutions, scattering coefficients and entire-function growth estimators.

Eigen-recurrence for a static potential supported on ``[0, N_V]``::

    x(n+1) + x(n-1) + (V(n) - 2) x(n) = mu(theta) x(n),  mu = theta + 1/theta - 2

``mu`` is the Laplacian eigenvalue of the plane wave ``theta**n``, so free
evolution multiplies ``sum_n u(n) theta**n`` by ``exp(i t mu(theta))``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .evolution import PotentialProvider
from .lattice import LatticeWindow, State
from .logdomain import LogComplex, LogReal, log_add_complex

DEGENERATE_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Growth slope did not settle over successive radius windows."""


class DegenerateSystemError(ValueError):
    """theta = +-1: the two Jost solutions are linearly dependent."""


def multiplier(theta: complex) -> complex:
    return theta + 1.0 / theta - 2.0


def _support(V: PotentialProvider | None) -> tuple[np.ndarray, int]:
    if V is None or V.is_zero:
        return np.zeros(0), 0
    if not isinstance(V.support, tuple):
        raise ValueError("Jost solutions need a finite-support static potential")
    lo, hi = V.support
    if lo < 0:
        raise ValueError("potential support must start at n >= 0")
    vals = np.zeros(hi + 1)
    vals[lo:] = V.site_values
    return vals, hi


@dataclass(frozen=True, eq=False)
class JostPair:
    theta: complex
    window: LatticeWindow
    e_plus: np.ndarray
    e_minus: np.ndarray
    support_end: int
    potential: np.ndarray
    condition: float

    @property
    def eigenvalue(self) -> complex:
        return multiplier(self.theta)

    def at(self, which: str, n: int) -> complex:
        seq = self.e_plus if which == "plus" else self.e_minus
        return complex(seq[self.window.position(n)])

    def recurrence_residual(self) -> tuple[float, float]:
        """Max relative residual of the eigen-recurrence for (e_plus, e_minus)."""
        ns = self.window.indices[1:-1]
        v = np.array([self.potential[n] if 0 <= n < self.potential.size else 0.0 for n in ns])
        lam = self.theta + 1.0 / self.theta
        out = []
        for seq in (self.e_plus, self.e_minus):
            x0, xm, xp = seq[1:-1], seq[:-2], seq[2:]
            res = np.abs(xp + xm + (v - lam) * x0)
            scale = np.maximum.reduce([np.abs(xp), np.abs(xm), np.abs(lam * x0), np.abs(v * x0)])
            out.append(float(np.max(res / np.where(scale > 0, scale, 1.0))))
        return out[0], out[1]


def jost_solve(theta: complex, V: PotentialProvider | None, window: LatticeWindow | None = None) -> JostPair:
    """Both Jost solutions on ``window``.

    ``e_plus`` is seeded with ``theta**n`` at ``n = N_V+1, N_V+2`` and recursed
    downward; ``e_minus`` is seeded at ``n = -2, -1`` and recursed upward.
    """
    theta = complex(theta)
    if theta == 0:
        raise ValueError("theta must be non-zero")
    if not 1e-3 <= abs(theta) <= 1e3:
        raise ValueError(f"|theta| = {abs(theta):.3g} outside [1e-3, 1e3]")
    if min(abs(theta - 1), abs(theta + 1)) < DEGENERATE_TOL:
        warnings.warn("theta is within 1e-12 of +-1; Jost system is degenerate", RuntimeWarning, stacklevel=2)
    vals, n_v = _support(V)
    if window is None:
        window = LatticeWindow(n_v + 8)
    N = window.half_width
    if N < n_v + 2:
        raise ValueError(f"window half width must be >= {n_v + 2}")
    ns = window.indices
    lam = theta + 1.0 / theta

    def v(n):
        return vals[n] if 0 <= n <= n_v and vals.size else 0.0

    plus = np.empty(ns.size, dtype=complex)
    minus = np.empty(ns.size, dtype=complex)
    pos = window.position
    for n in ns:
        if n > n_v:
            plus[pos(n)] = theta ** int(n)
        if n < 0:
            minus[pos(n)] = theta ** int(n)
    for n in range(n_v + 1, -N, -1):
        # x(n-1) = (lam - V(n)) x(n) - x(n+1)
        plus[pos(n - 1)] = (lam - v(n)) * plus[pos(n)] - plus[pos(n + 1)]
    for n in range(-1, N):
        minus[pos(n + 1)] = (lam - v(n)) * minus[pos(n)] - minus[pos(n - 1)]

    # growth of the recursed part relative to the seeds
    seed = max(abs(theta) ** (n_v + 1), abs(theta) ** -(n_v + 1))
    cond = float(max(np.max(np.abs(plus)), np.max(np.abs(minus))) / seed)
    return JostPair(theta, window, plus, minus, n_v, vals, cond)


def casoratian(f, g, n: int, window: LatticeWindow | None = None) -> complex:
    """Discrete Wronskian ``f(n+1) g(n) - f(n) g(n+1)``.

    ``f`` and ``g`` are callables of the lattice index, or arrays laid out on
    ``window``.
    """
    if window is not None:
        fa, ga = np.asarray(f), np.asarray(g)
        p = window.position(n)
        window.position(n + 1)
        return complex(fa[p + 1] * ga[p] - fa[p] * ga[p + 1])
    return complex(f(n + 1) * g(n) - f(n) * g(n + 1))


def casoratian_profile(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``W(f, g)(n)`` at every ``n`` with ``n + 1`` in the window."""
    return f[1:] * g[:-1] - f[:-1] * g[1:]


def casoratian_spread(f: np.ndarray, g: np.ndarray, ref: int | None = None, rows: slice | None = None) -> float:
    """Max relative deviation of ``W(f, g)(n)`` from its value at ``ref``.

    ``rows`` restricts the scan to a slice of the profile (position ``p``
    holds ``W`` at the ``p``-th window index).
    """
    w = casoratian_profile(f, g)
    if rows is not None:
        w = w[rows]
    w_ref = w[len(w) // 2 if ref is None else ref]
    return float(np.max(np.abs(w - w_ref)) / abs(w_ref))


@dataclass(frozen=True)
class ScatteringCoeffs:
    theta: complex
    a_plus: complex
    b_plus: complex
    a_minus: complex
    b_minus: complex
    wronskian_spread: float


def scattering_coeffs(
    theta: complex,
    V: PotentialProvider | None,
    window: LatticeWindow | None = None,
    at: int | None = None,
) -> ScatteringCoeffs:
    """Connection coefficients of ``e_minus = a_plus e_plus(theta) + b_plus e_plus(1/theta)``
    and ``e_plus = a_minus e_minus(theta) + b_minus e_minus(1/theta)``.

    ``at`` selects the lattice index where the Casoratians are evaluated
    (default ``N_V + 1``).
    """
    theta = complex(theta)
    if theta == 0:
        raise ValueError("theta must be non-zero")
    if min(abs(theta - 1), abs(theta + 1)) < DEGENERATE_TOL:
        raise DegenerateSystemError("theta = +-1 gives a degenerate fundamental system")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        j = jost_solve(theta, V, window)
        ji = jost_solve(1.0 / theta, V, j.window)
    n = j.support_end + 1 if at is None else at
    w = j.window

    def W(f, g):
        return casoratian(f, g, n, w)

    w_plus = W(j.e_plus, ji.e_plus)
    w_minus = W(j.e_minus, ji.e_minus)
    # Far from the support one solution grows like |theta|^|n| while its
    # partner decays, so W there is a difference of huge, nearly equal
    # products. Constancy is measured on the band around the support.
    band = slice(w.position(-2), w.position(j.support_end + 2) + 1)
    spread = max(
        casoratian_spread(j.e_plus, ji.e_plus, rows=band),
        casoratian_spread(j.e_minus, ji.e_minus, rows=band),
    )
    return ScatteringCoeffs(
        theta,
        W(j.e_minus, ji.e_plus) / w_plus,
        W(j.e_plus, j.e_minus) / w_plus,
        W(j.e_plus, ji.e_minus) / w_minus,
        W(j.e_minus, j.e_plus) / w_minus,
        spread,
    )


def single_site_coeffs(theta: complex, c: complex) -> tuple[complex, complex, complex, complex]:
    """Closed-form ``(a_plus, b_plus, a_minus, b_minus)`` for ``V = c * delta_0``.

    Eliminating the one perturbed row of the recurrence gives, with
    ``D = 1/theta - theta``: ``a_plus = 1 + c/D``, ``b_plus = -c/D``,
    ``a_minus = 1 - c/D``, ``b_minus = c/D``.  Works with ``Fraction`` inputs.
    """
    D = 1 / theta - theta
    return 1 + c / D, -c / D, 1 - c / D, c / D


def phi_series_log(s: State, theta: complex, V: PotentialProvider | None = None) -> LogComplex:
    """``sum_n s(n) e_minus(theta, n)`` accumulated in log domain."""
    theta = complex(theta)
    ns = s.indices
    if V is None or V.is_zero:
        log_e = ns * math.log(abs(theta))
        ph_e = ns * cmath.phase(theta)
    else:
        j = jost_solve(theta, V, s.window)
        with np.errstate(divide="ignore"):
            log_e = np.log(np.abs(j.e_minus))
        ph_e = np.angle(j.e_minus)
    lm, ph = log_add_complex(s.log_mag + log_e, s.phase + ph_e)
    return LogComplex(float(lm), float(ph))


def phi_series(s: State, theta: complex, V: PotentialProvider | None = None) -> complex:
    return phi_series_log(s, theta, V).value


# ------------------------------------------------------------ type estimation

DIVERGENCE_SLOPE = 0.25


@dataclass(frozen=True)
class TypeEstimate:
    indices: np.ndarray
    values: np.ndarray
    tail_sup: np.ndarray
    sigma_estimate: float
    divergent: bool
    growth_slope: float


def exp_type_from_coeffs(c, n_min: int, n_max: int) -> TypeEstimate:
    """Exponential type from Taylor coefficient magnitudes.

    ``c[n]`` is ``|c_n|`` (a LogReal or float) for ``n = 0, 1, ...``.  The
    values ``n |c_n|**(1/n)`` are formed in log domain; their running tail
    supremum is read off at the middle of ``[n_min, n_max]`` so that a finite
    stretch of small-``n`` coefficients cannot dominate the limsup.
    """
    if not 1 <= n_min <= n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    if n_max >= len(c):
        raise ValueError(f"only {len(c)} coefficients supplied, need index {n_max}")
    ns = np.arange(n_min, n_max + 1)
    logs = np.array([_log_abs(c[n]) for n in ns])
    with np.errstate(over="ignore"):
        log_v = np.log(ns) + logs / ns
        values = np.exp(log_v)
    tail = np.maximum.accumulate(values[::-1])[::-1]
    half = ns.size // 2
    sigma = float(tail[half] / math.e)
    top_n, top_v = ns[half:], log_v[half:]
    finite = np.isfinite(top_v)
    if finite.sum() >= 2 and np.ptp(np.log(top_n[finite])) > 0:
        slope = float(np.polyfit(np.log(top_n[finite]), top_v[finite], 1)[0])
    else:
        slope = 0.0
    return TypeEstimate(ns, values, tail, sigma, slope > DIVERGENCE_SLOPE, slope)


def _log_abs(x) -> float:
    if isinstance(x, LogReal):
        return x.log_mag
    if isinstance(x, LogComplex):
        return x.log_mag
    x = abs(complex(x))
    return math.log(x) if x > 0 else -math.inf


def taylor_coeffs_from_state(s: State) -> list[LogReal]:
    """``|u(k)|`` for ``k = 0 .. N``: the Taylor coefficients of ``sum_{k>=0} u(k) z**k``."""
    N = s.window.half_width
    return [LogReal.from_log(float(s.log_mag[N + k])) for k in range(N + 1)]


# -------------------------------------------------------------- ray growth


@dataclass(frozen=True)
class RayGrowth:
    angle: float
    radii: np.ndarray
    log_abs: np.ndarray
    slope: float
    max_deviation: float
    window_slopes: tuple[float, float]


def default_radii() -> np.ndarray:
    return np.geomspace(2.0, 64.0, 12)


def _fit(r, y):
    A = np.vstack([r, np.ones_like(r)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(coef[1])


def ray_growth(
    f: Callable[[complex], complex | LogComplex],
    alpha: float,
    radii=None,
    rtol: float = 0.1,
) -> RayGrowth:
    """Least-squares slope of ``log|f(r e^{i alpha})|`` against ``r``.

    The fit uses the largest half of the radii.  It is compared with the fit
    over the largest quarter; if they differ by more than ``rtol`` (relative to
    ``max(|slope|, 0.5)``) a :class:`ConvergenceError` is raised.
    """
    r = np.asarray(default_radii() if radii is None else radii, dtype=float)
    if r.size < 4 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ValueError("need at least 4 positive increasing radii")
    y = np.array([_log_abs(f(rr * cmath.exp(1j * alpha))) for rr in r])
    if not np.all(np.isfinite(y)):
        raise ValueError("f vanished or overflowed on the ray")
    top = slice(r.size // 2, None)
    slope, icpt = _fit(r[top], y[top])
    q = r.size - max(r.size // 4, 2)
    slope_q, _ = _fit(r[q:], y[q:])
    dev = float(np.max(np.abs(y[top] - (slope * r[top] + icpt))))
    if abs(slope - slope_q) > rtol * max(abs(slope), 0.5):
        raise ConvergenceError(f"slope {slope:.4g} vs {slope_q:.4g} over the outer radii")
    return RayGrowth(float(alpha), r, y, slope, dev, (slope, slope_q))
