"""Commutator coefficients of the weighted evolution and the inequalities they obey.

With ``d_n = kappa(n+1) - kappa(n)`` (always taken from the weight's
cancellation-free ``step``)::

    a_n = 2 sinh d_n,   b_n = 2 cosh d_n
    mu_n = a_n b_n - a_{n-1} b_{n-1} + 2 kappa''_n
         = 4 cosh(d_n + d_{n-1}) sinh(d_n - d_{n-1}) + 2 kappa''_n
    nu_{n+1} = (a_n b_{n+1} - a_{n+1} b_n) / 2 = 2 sinh(d_n - d_{n+1})
    |lambda_n| = 2 b_n |kappa'_{n+1} - kappa'_n|

The product forms avoid subtracting numbers of size ``exp(2 d)`` whose
difference is ``O(1)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .evolution import EvolutionTrace
from .lattice import State, weighted_norm_sq_log
from .logdomain import logsumexp
from .weights import BridgeWeight, ConvexityWeight, EnergyWeight, WeightFamily, weight_to_dict

MU_TOL = 1e-12
SECOND_DIFF_TOL = 1e-12
CONVEXITY_TOL = 1e-3
BRIDGE_HEAD = 10


@dataclass(frozen=True)
class CoefficientRow:
    t: float
    n: int
    a: float
    b: float
    mu: float
    lambda_mag: float
    nu: float
    kappa_t: float
    kappa_tt: float
    sigma: float | None = None
    rho: float | None = None


def _sigma_rho(w: ConvexityWeight, t: float, ns, eps: float):
    g = w.gamma
    M = w.M(t, ns)
    A = abs(w.dR(t))
    e2g = math.exp(2.0 * g)
    sigma = (
        2.0 * g * e2g * M ** (2 * g - 1)
        + g * e2g * ((g - 1.0) ** 2 / 3.0 - 2.0 * eps) * M ** (2 * g - 3)
        + 2.0 * A * A * g / M
    )
    rho = eps * g * e2g * M ** (2 * g - 3) - 4.0 * w.r0 * g * (1.0 + np.log(M))
    return sigma, rho


def coeff_table(w: WeightFamily, t: float, ns, eps: float | None = None) -> dict[str, np.ndarray]:
    """Vectorised :func:`coeff_row` over an integer array ``ns``."""
    ns = np.asarray(ns, dtype=np.int64)
    d = w.step(t, ns)
    d_prev = w.step(t, ns - 1)
    second = w.second_step(t, ns - 1)  # d_n - d_{n-1}
    second_next = w.second_step(t, ns)  # d_{n+1} - d_n
    ktt = np.asarray(w.kappa_tt(t, ns), dtype=float)
    out = {
        "n": ns,
        "a": 2.0 * np.sinh(d),
        "b": 2.0 * np.cosh(d),
        "mu": 4.0 * np.cosh(d + d_prev) * np.sinh(second) + 2.0 * ktt,
        "lambda": 2.0 * 2.0 * np.cosh(d) * np.abs(w.kappa_t_step(t, ns)),
        "nu": -2.0 * np.sinh(second_next),
        "kappa_t": np.asarray(w.kappa_t(t, ns), dtype=float),
        "kappa_tt": ktt,
    }
    if isinstance(w, ConvexityWeight):
        sigma, rho = _sigma_rho(w, t, ns, w.default_eps() if eps is None else eps)
        out["sigma"], out["rho"] = sigma, rho
    return out


def coeff_row(w: WeightFamily, t: float, n: int, eps: float | None = None) -> CoefficientRow:
    tab = coeff_table(w, t, np.array([n]), eps)
    get = lambda k: float(tab[k][0]) if k in tab else None  # noqa: E731
    return CoefficientRow(
        float(t), int(n), get("a"), get("b"), get("mu"), get("lambda"), get("nu"),
        get("kappa_t"), get("kappa_tt"), get("sigma"), get("rho"),
    )


# ------------------------------------------------------------------ reports


@dataclass
class ConvexityReport:
    """Outcome of a scan.  ``margins[k] < -tolerances[k]`` exactly when ``violations[k]`` is set."""

    name: str
    params: dict
    n_range: tuple[int, int]
    t_grid: list[float]
    margins: dict[str, float] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    violations: dict[str, dict | None] = field(default_factory=dict)
    constants: dict[str, float] = field(default_factory=dict)

    def record(self, key: str, margin: float, tol: float, where: dict | None) -> None:
        self.margins[key] = float(margin)
        self.tolerances[key] = float(tol)
        self.violations[key] = where if margin < -tol else None

    @property
    def passed(self) -> bool:
        return all(v is None for v in self.violations.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _first_negative(values: np.ndarray, tol: float) -> int | None:
    bad = np.flatnonzero(values < -tol)
    return int(bad[0]) if bad.size else None


# ------------------------------------------------------------- energy weight


def psipos_lhs(alpha: float, t: float, ns) -> np.ndarray:
    """``2 d/dt kappa_n + |a_n| + |a_{n-1}|`` for the energy weight."""
    w = EnergyWeight(alpha)
    ns = np.asarray(ns, dtype=np.int64)
    return 2.0 * w.kappa_t(t, ns) + np.abs(2.0 * np.sinh(w.step(t, ns))) + np.abs(2.0 * np.sinh(w.step(t, ns - 1)))


def check_psipos(alpha: float, t_grid, n_max: int, head: int = 100) -> ConvexityReport:
    """Sup of the energy-estimate left side over ``|n| <= n_max`` and the grid.

    ``constants["sup"]`` is the measured constant ``2C``; the check fails if
    the supremum sits beyond ``|n| = head``.
    """
    ns = np.arange(-n_max, n_max + 1)
    best, arg = -math.inf, (0, 0.0)
    for t in t_grid:
        lhs = psipos_lhs(alpha, float(t), ns)
        k = int(np.argmax(lhs))
        if lhs[k] > best:
            best, arg = float(lhs[k]), (int(ns[k]), float(t))
    rep = ConvexityReport("psipos", {"alpha": alpha}, (-n_max, n_max), [float(t) for t in t_grid])
    rep.constants.update(sup=best, argmax_n=arg[0], argmax_t=arg[1])
    rep.record("sup_location", head - abs(arg[0]), 0.0, {"n": arg[0], "t": arg[1]})
    rep.record("finite", 0.0 if math.isfinite(best) else -math.inf, 0.0, {"sup": best})
    return rep


# ------------------------------------------------------------- bridge weight


def check_bridge(gamma: float, b: float, n_max: int) -> ConvexityReport:
    """``mu_n >= 0``, ``|nu_{n+1}|`` bounded and the second difference of
    ``kappa_b`` non-negative and bounded, for ``|n| <= n_max``."""
    w = BridgeWeight(gamma, b)
    ns = np.arange(-n_max, n_max + 1)
    tab = coeff_table(w, 0.0, ns)
    second = w.second_step(0.0, ns)
    rep = ConvexityReport("bridge", {"gamma": gamma, "b": b}, (-n_max, n_max), [0.0])

    mu = tab["mu"]
    k = _first_negative(mu, MU_TOL)
    rep.record("mu", float(mu.min()), MU_TOL, None if k is None else {"n": int(ns[k]), "mu": float(mu[k])})
    k = _first_negative(second, SECOND_DIFF_TOL)
    rep.record(
        "second_difference",
        float(second.min()),
        SECOND_DIFF_TOL,
        None if k is None else {"n": int(ns[k]), "value": float(second[k])},
    )
    # bounded: the largest second difference is already reached near the origin
    head = np.abs(ns) <= BRIDGE_HEAD
    sup_head, sup_all = float(second[head].max()), float(second.max())
    rep.record("second_difference_bounded", sup_head - sup_all, 0.0, {"sup_all": sup_all, "sup_head": sup_head})
    rep.constants.update(
        C3=float(np.max(np.abs(tab["nu"]))),
        second_difference_sup=sup_all,
        second_difference_at_nmax=float(second[-1]),
        mu_min=float(mu.min()),
    )
    return rep


# ---------------------------------------------------------- convexity weight


def threshold_polynomial(gamma: float) -> float:
    """``2 gamma^2 - 6 gamma + 3``; positive exactly above ``(3 + sqrt 3) / 2``."""
    return 2.0 * gamma * gamma - 6.0 * gamma + 3.0


GAMMA_THRESHOLD = (3.0 + math.sqrt(3.0)) / 2.0


def quadratic_margin(w: ConvexityWeight, t: float, ns, eps: float | None = None) -> np.ndarray:
    """``sigma_n sigma_{n+1} - 4 |lambda_n|^2`` for ``n >= 0``."""
    ns = np.asarray(ns, dtype=np.int64)
    eps = w.default_eps() if eps is None else eps
    s0, _ = _sigma_rho(w, t, ns, eps)
    s1, _ = _sigma_rho(w, t, ns + 1, eps)
    lam = 4.0 * np.cosh(w.step(t, ns)) * np.abs(w.kappa_t_step(t, ns))
    return s0 * s1 - 4.0 * lam * lam


def check_quadr(gamma, c0, r0, t_grid, n_max: int, eps: float | None = None) -> ConvexityReport:
    w = ConvexityWeight(gamma, c0, r0)
    eps = w.default_eps() if eps is None else eps
    ns = np.arange(0, n_max + 1)
    worst, where, first = math.inf, None, None
    for t in t_grid:
        m = quadratic_margin(w, float(t), ns, eps)
        k = int(np.argmin(m))
        if m[k] < worst:
            worst, where = float(m[k]), {"n": int(ns[k]), "t": float(t)}
        j = _first_negative(m, 0.0)
        if first is None and j is not None:
            first = {"n": int(ns[j]), "t": float(t), "margin": float(m[j])}
    rep = ConvexityReport(
        "quadratic_form",
        {"gamma": gamma, "c0": c0, "r0": r0, "eps": eps},
        (0, n_max),
        [float(t) for t in t_grid],
    )
    rep.record("sigma_sigma_minus_4lambda2", worst, 0.0, first)
    rep.constants.update(min_margin_n=where["n"], min_margin_t=where["t"], threshold=threshold_polynomial(gamma))
    return rep


@dataclass
class C0Sweep:
    gamma: float
    r0: float
    c0: float | None
    history: list[ConvexityReport]

    @property
    def passed(self) -> bool:
        return self.c0 is not None


def sweep_c0(gamma, r0, t_grid, n_max: int, start: float = 2.0, max_doublings: int = 30, eps=None) -> C0Sweep:
    """Double ``C0`` from ``start`` until :func:`check_quadr` passes."""
    history = []
    c0 = float(start)
    for _ in range(max_doublings + 1):
        rep = check_quadr(gamma, c0, r0, t_grid, n_max, eps)
        history.append(rep)
        if rep.passed:
            return C0Sweep(gamma, r0, c0, history)
        c0 *= 2.0
    return C0Sweep(gamma, r0, None, history)


@dataclass(frozen=True)
class RhoBound:
    gamma: float
    r0: float
    eps: float
    minimum: float
    argmin: float
    closed_form: float
    critical_point: float
    c1: float
    closed_form_bound: float

    @property
    def holds(self) -> bool:
        return self.minimum >= self.closed_form_bound - 1e-10 * abs(self.closed_form_bound)


def rho_c1(gamma: float, eps: float) -> float:
    """Constant ``C1`` in ``min_M rho = -(4g/(2g-3)) R0 ln R0 - C1 R0`` (exact)."""
    p = 2.0 * gamma - 3.0
    return 4.0 * gamma * (1.0 - 1.0 / p + (math.log(4.0) - math.log(eps * p) - 2.0 * gamma) / p)


def rho_bound(gamma: float, r0: float, eps: float) -> RhoBound:
    """Minimum over ``M > 0`` of ``eps g e^{2g} M^{2g-3} - 4 R0 g (1 + ln M)``."""
    if not gamma > 1.5:
        raise ValueError("rho bound needs gamma > 3/2")
    if not r0 > 1 or not eps > 0:
        raise ValueError("rho bound needs R0 > 1 and eps > 0")
    p = 2.0 * gamma - 3.0
    e2g = math.exp(2.0 * gamma)

    def g(M):
        return eps * gamma * e2g * M**p - 4.0 * r0 * gamma * (1.0 + math.log(M))

    log_star = (math.log(4.0 * r0) - math.log(p * eps) - 2.0 * gamma) / p
    res = minimize_scalar(
        lambda x: g(math.exp(x)),
        bracket=(log_star - 1.0, log_star + 1.0),
        method="brent",
        tol=1e-12,
    )
    m_star = math.exp(log_star)
    c1 = rho_c1(gamma, eps)
    bound = -(4.0 * gamma / p) * r0 * math.log(r0) - c1 * r0
    return RhoBound(gamma, r0, eps, float(res.fun), math.exp(res.x), g(m_star), m_star, c1, bound)


@dataclass(frozen=True)
class ConvexityConstants:
    gamma: float
    c0: float
    r0: float
    eps: float
    c1: float
    c3: float
    c4: float
    c2: float
    lower_bound: float  # L with d^2/dt^2 log H >= -L

    @property
    def d(self) -> float:
        """Correction ``d`` making ``exp(-d t (1-t)) H(t)`` log-convex."""
        return self.lower_bound / 2.0


def fit_convexity_constants(gamma, c0, r0, t_grid, n_max: int, v_sup: float = 0.0, eps=None) -> ConvexityConstants:
    """Measure ``C3 = sup |nu|`` and ``C4 = sup (sigma + rho - mu)_+`` on the grid.

    ``C2 = C4 + 2 C3 + |V|_inf^2`` and the lower bound is
    ``(4g/(2g-3)) R0 ln R0 + C1 R0 + C2``.
    """
    w = ConvexityWeight(gamma, c0, r0)
    eps = w.default_eps() if eps is None else eps
    ns = np.arange(0, n_max + 1)
    c3 = c4 = 0.0
    for t in t_grid:
        tab = coeff_table(w, float(t), ns, eps)
        c3 = max(c3, float(np.max(np.abs(tab["nu"]))))
        c4 = max(c4, float(np.max(tab["sigma"] + tab["rho"] - tab["mu"])))
    c1 = rho_c1(gamma, eps)
    c2 = c4 + 2.0 * c3 + v_sup**2
    p = 2.0 * gamma - 3.0
    lower = (4.0 * gamma / p) * r0 * math.log(r0) + c1 * r0 + c2
    return ConvexityConstants(gamma, c0, r0, eps, c1, c3, c4, c2, lower)


# ------------------------------------------------------------ measured H(t)


def second_difference_scan(times, log_H, C: float, name: str = "log_convexity", params=None) -> ConvexityReport:
    """Min over interior points of the centred second difference of ``log H`` plus ``2C``."""
    times = np.asarray(times, dtype=float)
    log_H = np.asarray(log_H, dtype=float)
    if times.size < 5:
        raise ValueError("need at least 5 time points")
    dt = np.diff(times)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])):
        raise ValueError("time grid must be uniform")
    if not np.all(np.isfinite(log_H)):
        raise ValueError("weighted norms must be finite")
    h = dt[0]
    sd = (log_H[2:] + log_H[:-2] - 2.0 * log_H[1:-1]) / (h * h)
    vals = sd + 2.0 * C
    k = int(np.argmin(vals))
    rep = ConvexityReport(name, dict(params or {}, C=C), (0, 0), times.tolist())
    j = _first_negative(vals, CONVEXITY_TOL)
    rep.record(
        "second_difference_plus_2C",
        float(vals[k]),
        CONVEXITY_TOL,
        None if j is None else {"t": float(times[j + 1]), "value": float(vals[j])},
    )
    rep.constants.update(
        min_t=float(times[k + 1]),
        min_second_difference=float(sd[k]),
        max_second_difference=float(sd.max()),
    )
    return rep


def log_convexity_scan(trace: EvolutionTrace, w: WeightFamily, C: float) -> ConvexityReport:
    if trace.log_H is not None and trace.weight == w:
        log_H = trace.log_H
    else:
        log_H = np.array([weighted_norm_sq_log(trace.state(i), w, t) for i, t in enumerate(trace.times)])
    N = trace.window.half_width
    rep = second_difference_scan(trace.times, log_H, C, params=weight_to_dict(w))
    rep.n_range = (-N, N)
    return rep


def states_log_H(states: list[State], times, w: WeightFamily) -> np.ndarray:
    return np.array([weighted_norm_sq_log(s, w, float(t)) for s, t in zip(states, times)])


# ------------------------------------------------------------ energy estimate


@dataclass(frozen=True)
class EnergyFit:
    C: float
    log_lhs: float
    log_rhs: float
    holds: bool
    bound: float
    within_bound: bool


def energy_estimate_check(
    trace: EvolutionTrace,
    alpha: float,
    forcing=None,
    v2_sup: float = 0.0,
    psipos_sup: float | None = None,
    T: float | None = None,
) -> tuple[ConvexityReport, EnergyFit]:
    """Smallest ``C >= 0`` with
    ``H(t) <= e^{C t} (H(0) + int_0^t |psi F|^2)`` at every grid time ``t <= T``.

    Every quantity is kept in log domain; the time integral is the
    trapezoid rule on the trace grid.
    """
    w = EnergyWeight(alpha)
    times = trace.times
    if T is None:
        T = float(times[-1])
    keep = times <= T + 1e-12
    times = times[keep]
    log_H = np.array([weighted_norm_sq_log(trace.state(i), w, t) for i, t in enumerate(times)])
    ns = trace.window.indices
    if forcing is not None:
        log_f = []
        for t in times:
            fv = np.abs(forcing.value(float(t), ns))
            with np.errstate(divide="ignore"):
                log_f.append(logsumexp(2.0 * w.kappa(float(t), ns) + 2.0 * np.log(fv)))
        log_f = np.array(log_f)
    else:
        log_f = np.full(times.size, -math.inf)
    # cumulative trapezoid in log domain
    log_int = np.full(times.size, -math.inf)
    for i in range(1, times.size):
        h = times[i] - times[i - 1]
        piece = logsumexp([log_f[i - 1], log_f[i]]) + math.log(h / 2.0) if h > 0 else -math.inf
        log_int[i] = np.logaddexp(log_int[i - 1], piece)
    log_rhs0 = np.logaddexp(log_H[0], log_int)
    ratios = (log_H[1:] - log_rhs0[1:]) / times[1:]
    C = max(0.0, float(np.max(ratios))) if ratios.size else 0.0
    log_lhs, log_rhs = float(log_H[-1]), float(C * times[-1] + log_rhs0[-1])
    if psipos_sup is None:
        psipos_sup = check_psipos(alpha, np.linspace(0.0, 1.0, 11), 1000).constants["sup"]
    bound = 2.0 * psipos_sup + v2_sup + 1.0
    fit = EnergyFit(C, log_lhs, log_rhs, log_lhs <= log_rhs + 1e-12, bound, C <= bound)
    rep = ConvexityReport(
        "energy_estimate",
        {"alpha": alpha, "T": T, "v2_sup": v2_sup},
        (-trace.window.half_width, trace.window.half_width),
        times.tolist(),
    )
    rep.record("inequality_at_T", log_rhs - log_lhs, 1e-12, {"log_lhs": log_lhs, "log_rhs": log_rhs})
    rep.record("C_within_bound", bound - C, 0.0, {"C": C, "bound": bound})
    rep.constants.update(C=C, bound=bound, psipos_sup=psipos_sup)
    return rep, fit


# ------------------------------------------------------------ vanishing pressure


def leading_coefficients(gamma: float) -> tuple[float, float]:
    """``(gamma/2, gamma/(2(2 gamma - 3)))``: growth rates of the two sides in ``R0 ln R0``."""
    if not gamma > 1.5:
        raise ValueError("leading coefficients need gamma > 3/2")
    return gamma / 2.0, gamma / (2.0 * (2.0 * gamma - 3.0))


@dataclass(frozen=True)
class PressureRow:
    r0: float
    lhs: float
    rhs: float
    gap: float


def vanishing_pressure(
    gamma: float,
    c0: float,
    r0_list,
    u_half: State | None = None,
    n: int = 0,
    eps: float | None = None,
) -> list[PressureRow]:
    """Weight exponent at ``t = 1/2`` versus the allowed growth, per ``R0``.

    ``lhs = 2 g M ln M`` with ``M = |n| + C0 + R0/4`` (plus ``log|u(1/2, n)|^2``
    when a state is supplied), ``rhs = g/(2(2g-3)) R0 ln R0 + C1 R0 / 8``.
    """
    if not gamma > 2:
        raise ValueError("vanishing pressure needs gamma > 2")
    eps = min(0.01, (gamma - 1.0) ** 2 / 12.0) if eps is None else eps
    c1 = rho_c1(gamma, eps)
    _, slow = leading_coefficients(gamma)
    extra = 0.0
    if u_half is not None:
        extra = 2.0 * float(u_half.log_mag[u_half.window.position(n)])
    rows = []
    for r0 in r0_list:
        M = abs(n) + c0 + r0 / 4.0
        lhs = 2.0 * gamma * M * math.log(M) + extra
        rhs = slow * r0 * math.log(r0) + c1 * r0 / 8.0
        rows.append(PressureRow(float(r0), lhs, rhs, lhs - rhs))
    return rows
