"""The thirteen acceptance checks as plain functions.

Each returns a :class:`CriterionResult`; scenarios and the test-suite share
them so the CLI exit status and the tests can never disagree.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..convexity import (
    check_bridge,
    check_psipos,
    energy_estimate_check,
    fit_convexity_constants,
    leading_coefficients,
    states_log_H,
    second_difference_scan,
    sweep_c0,
    threshold_polynomial,
    vanishing_pressure,
)
from ..evolution import (
    PotentialProvider,
    extremizer,
    extremizer_time_derivative,
    free_evolve,
    random_forcing,
    random_potential,
    residual,
    step_evolve,
)
from ..lattice import LatticeWindow, State, l2_distance
from ..logdomain import LogReal
from ..rng import stream
from ..scattering import (
    casoratian_spread,
    exp_type_from_coeffs,
    jost_solve,
    multiplier,
    phi_series,
    scattering_coeffs,
    single_site_coeffs,
)
from ..special import heat_kernel, log_bessel_j, log_factorial
from ..weights import ConvexityWeight

T_GRID_TENTHS = [round(0.1 * k, 10) for k in range(11)]


@dataclass
class CriterionResult:
    id: int | None
    name: str
    passed: bool
    measured: dict
    threshold: dict
    runtime: float = 0.0
    runtime_limit: float | None = None
    cases: list = field(default_factory=list)

    @property
    def within_time(self) -> bool:
        return self.runtime_limit is None or self.runtime <= self.runtime_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        meas = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        label = f"criterion {self.id:2d}" if self.id is not None else "check"
        return f"{label} {status}  {self.name}: {meas} [{self.runtime:.2f}s]"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "passed": self.ok,
            "measured": self.measured,
            "threshold": self.threshold,
            "runtime": self.runtime,
            "runtime_limit": self.runtime_limit,
            "cases": self.cases,
        }


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return v


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.runtime = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ----------------------------------------------------------------- 1 .. 4


@_timed
def extremizer_residual(half_width: int = 60, times=(0.1, 0.3, 0.5, 0.7, 0.9), tol: float = 1e-12):
    W = LatticeWindow(half_width)
    worst = 0.0
    for t in times:
        r = residual(lambda s: extremizer(s, 1.0, W), None, t, lambda s: extremizer_time_derivative(s, 1.0, W))
        worst = max(worst, r)
    return CriterionResult(1, "extremizer residual", worst <= tol, {"max_residual": worst}, {"max": tol}, runtime_limit=1.0)


@_timed
def propagator_equivalence(half_width: int = 64, t: float = 1.0, dt: float = 1e-3, tol: float = 1e-8):
    W = LatticeWindow(half_width)
    s = State.delta(W)
    closed = free_evolve(s, t)
    stepped = step_evolve(s, None, None, 0.0, t, dt).final
    err = l2_distance(closed, stepped)
    return CriterionResult(2, "propagator oracle equivalence", err <= tol, {"l2_discrepancy": err}, {"max": tol}, runtime_limit=5.0)


def sharpness_values(n_lo: int = 150, n_hi: int = 250) -> np.ndarray:
    """``|J_n(1)| sqrt(n) (2n/e)^n`` evaluated through logs."""
    out = []
    for n in range(n_lo, n_hi + 1):
        lj = log_bessel_j(n, 1.0).log_mag
        out.append(math.exp(lj + 0.5 * math.log(n) + n * (math.log(2.0 * n) - 1.0)))
    return np.array(out)


@_timed
def sharpness_constant(lo: float = 0.394, hi: float = 0.404):
    v = sharpness_values()
    ok = bool(np.all((v >= lo) & (v <= hi)))
    return CriterionResult(
        3,
        "sharpness constant",
        ok,
        {"min": float(v.min()), "max": float(v.max()), "inv_sqrt_2pi": 1.0 / math.sqrt(2.0 * math.pi)},
        {"interval": [lo, hi]},
        runtime_limit=1.0,
    )


@_timed
def heat_kernel_normalisation(cutoff: int = 40, tol: float = 1e-14):
    total = math.fsum(heat_kernel(n).value for n in range(-cutoff, cutoff + 1))
    err = abs(total - 1.0)
    return CriterionResult(4, "heat-kernel normalisation", err <= tol, {"abs_error": err}, {"max": tol}, runtime_limit=0.1)


# ----------------------------------------------------------------- 5 .. 8


@_timed
def norm_conservation(seed: int = 0, trials: int = 50, half_width: int = 64, dt: float = 1e-3, tol: float = 1e-9):
    W = LatticeWindow(half_width)
    s = State.delta(W)
    worst, cases = 0.0, []
    for k in range(trials):
        V = random_potential(stream(seed, 5, k), 1.0, (-half_width, half_width), time_dependent=True)
        tr = step_evolve(s, V, None, 0.0, 1.0, dt, check_norm=False)
        drift = float(np.max(np.abs(tr.norms - tr.norms[0])))
        cases.append({"trial": k, "drift": drift})
        worst = max(worst, drift)
    return CriterionResult(
        5, "norm conservation", worst <= tol, {"max_drift": worst, "trials": trials}, {"max": tol},
        runtime_limit=120.0, cases=cases,
    )


def theta_grid_32() -> list[complex]:
    """Four radii times eight angles, none on the real axis."""
    radii = (0.8, 1.25, 1.6, 2.0)
    return [r * cmath.exp(1j * (math.pi / 8 + k * math.pi / 4)) for r in radii for k in range(8)]


SINGLE_SITE_CASES = [
    (Fraction(2), Fraction(1)),
    (Fraction(3, 2), Fraction(-1, 2)),
    (Fraction(-5, 4), Fraction(3, 4)),
    (Fraction(1, 3), Fraction(2)),
    (Fraction(7, 5), Fraction(-3)),
]


@_timed
def scattering_sanity(seed: int = 0, n_potentials: int = 20):
    zero = PotentialProvider.zero()
    zero_err = 0.0
    for th in theta_grid_32():
        sc = scattering_coeffs(th, zero)
        zero_err = max(zero_err, abs(sc.a_plus - 1), abs(sc.b_plus), abs(sc.a_minus - 1), abs(sc.b_minus))

    single_err = 0.0
    for th, c in SINGLE_SITE_CASES:
        exact = single_site_coeffs(th, c)
        sc = scattering_coeffs(float(th), PotentialProvider.from_sites([float(c)]))
        got = (sc.a_plus, sc.b_plus, sc.a_minus, sc.b_minus)
        single_err = max(single_err, max(abs(g - float(e)) / max(1.0, abs(float(e))) for g, e in zip(got, exact)))
    for th in (1.3 * cmath.exp(0.4j), 0.7j, -1.6 + 0.2j):
        exact = single_site_coeffs(th, 0.8)
        sc = scattering_coeffs(th, PotentialProvider.from_sites([0.8]))
        got = (sc.a_plus, sc.b_plus, sc.a_minus, sc.b_minus)
        single_err = max(single_err, max(abs(g - e) / max(1.0, abs(e)) for g, e in zip(got, exact)))

    spread = 0.0
    for k in range(n_potentials):
        th, V = seeded_theta_potential(seed, k)
        j, ji = jost_solve(th, V), jost_solve(1.0 / th, V)
        spread = max(spread, casoratian_spread(j.e_plus, ji.e_plus))
    ok = zero_err <= 1e-12 and single_err <= 1e-10 and spread <= 1e-11
    return CriterionResult(
        6,
        "scattering sanity",
        ok,
        {"free_error": zero_err, "single_site_error": single_err, "casoratian_spread": spread},
        {"free": 1e-12, "single_site": 1e-10, "spread": 1e-11},
        runtime_limit=5.0,
    )


def seeded_theta_potential(seed: int, k: int, sites: int = 5):
    rng = stream(seed, 6, k)
    V = random_potential(rng, 1.0, (0, sites - 1), time_dependent=False, finite_support=True)
    r = rng.uniform(0.8, 1.25)
    phi = rng.uniform(math.pi / 8, 7 * math.pi / 8) * (1 if rng.random() < 0.5 else -1)
    return r * cmath.exp(1j * phi), V


def exp_half_coeffs(n_max: int) -> list[LogReal]:
    """Taylor coefficient magnitudes of ``exp(z/2)``: ``2^-n / n!``."""
    return [LogReal.from_log(-n * math.log(2.0) - log_factorial(n)) for n in range(n_max + 1)]


@_timed
def type_estimator(n_max: int = 300, rel: float = 0.02):
    est = exp_type_from_coeffs(exp_half_coeffs(n_max), 1, n_max)
    err = abs(est.sigma_estimate - 0.5) / 0.5
    return CriterionResult(
        7, "type estimator", err <= rel and not est.divergent,
        {"sigma": est.sigma_estimate, "rel_error": err}, {"max_rel": rel}, runtime_limit=0.1,
    )


def multiplier_thetas() -> list[complex]:
    return [r * cmath.exp(1j * (0.3 + k * math.pi / 4)) for k, r in enumerate(np.linspace(1.1, 2.0, 8))]


@_timed
def multiplier_relation(half_width: int = 64, tol: float = 1e-8):
    W = LatticeWindow(half_width)
    u0 = extremizer(0.0, 1.0, W)
    u1 = free_evolve(u0, 1.0)
    worst, cases = 0.0, []
    for th in multiplier_thetas():
        p0, p1 = phi_series(u0, th), phi_series(u1, th)
        err = abs(p1 - cmath.exp(1j * multiplier(th)) * p0) / abs(p0)
        cases.append({"theta": [th.real, th.imag], "rel_error": err})
        worst = max(worst, err)
    return CriterionResult(8, "multiplier relation", worst <= tol, {"max_rel_error": worst}, {"max": tol}, runtime_limit=5.0, cases=cases)


# ----------------------------------------------------------------- 9 .. 13

BRIDGE_GAMMAS = (0.5, 1.0, 2.5)
BRIDGE_BS = (0.6, 0.75, 0.9)


def bridge_case(gamma: float, b: float, n_max: int = 100_000) -> dict:
    rep = check_bridge(gamma, b, n_max)
    return {
        "gamma": gamma,
        "b": b,
        "passed": rep.passed,
        "mu_min": rep.margins["mu"],
        "second_difference_min": rep.margins["second_difference"],
        "C3": rep.constants["C3"],
        "violations": rep.violations,
    }


@_timed
def bridge_inequalities(gammas=BRIDGE_GAMMAS, bs=BRIDGE_BS, n_max: int = 100_000):
    cases = [bridge_case(g, b, n_max) for g in gammas for b in bs]
    failed = [(c["gamma"], c["b"]) for c in cases if not c["passed"]]
    return CriterionResult(
        9,
        "bridge-weight inequalities",
        not failed,
        {"failed_cases": failed, "cases": len(cases)},
        {"mu_min": -1e-12, "second_difference_min": -1e-12},
        runtime_limit=10.0,
        cases=cases,
    )


@_timed
def quadratic_form(gamma: float = 2.5, r0: float = 4.0, n_max: int = 100_000, t_grid=T_GRID_TENTHS):
    sw = sweep_c0(gamma, r0, t_grid, n_max)
    margin = sw.history[-1].margins["sigma_sigma_minus_4lambda2"]
    thr2, thr3 = threshold_polynomial(2.0), threshold_polynomial(3.0)
    ok = sw.passed and margin >= 0 and thr2 == -1.0 and thr3 == 3.0
    return CriterionResult(
        10,
        "convexity-weight quadratic form",
        ok,
        {"c0": sw.c0, "min_margin": margin, "threshold_at_2": thr2, "threshold_at_3": thr3},
        {"min_margin": 0.0},
        runtime_limit=30.0,
        cases=[{"c0": h.params["c0"], "margin": h.margins["sigma_sigma_minus_4lambda2"]} for h in sw.history],
    )


def energy_trial(seed: int, k: int, alpha: float, half_width: int, dt: float, v2_sup: float, forcing: bool, psipos_sup: float):
    W = LatticeWindow(half_width)
    rng = stream(seed, 11, k)
    V = random_potential(rng, 1.0, (-half_width, half_width), time_dependent=True, imag_sup_norm=v2_sup)
    F = random_forcing(rng, 1.0, (-8, 8)) if forcing else None
    tr = step_evolve(State.delta(W), V, F, 0.0, 1.0, dt)
    return energy_estimate_check(tr, alpha, F, v2_sup, psipos_sup, T=1.0)


def psipos_sup(alpha: float, n_max: int = 100_000) -> float:
    return check_psipos(alpha, np.linspace(0.0, 1.0, 21), n_max).constants["sup"]


@_timed
def energy_estimate(seed: int = 0, trials: int = 20, alpha: float = 0.5, half_width: int = 64, dt: float = 1e-3, v2_sup: float = 0.5):
    sup = psipos_sup(alpha)
    cases = []
    for k in range(trials):
        rep, fit = energy_trial(seed, k, alpha, half_width, dt, v2_sup, True, sup)
        cases.append({"trial": k, "C": fit.C, "bound": fit.bound, "holds": fit.holds, "within_bound": fit.within_bound})
    ok = all(c["holds"] and c["within_bound"] for c in cases)
    return CriterionResult(
        11,
        "energy estimate",
        ok,
        {"max_C": max(c["C"] for c in cases), "bound": cases[0]["bound"], "psipos_sup": sup},
        {"C_max": "2 sup + |V2| + 1"},
        runtime_limit=120.0,
        cases=cases,
    )


def extremizer_log_H(gamma, c0, r0, half_width: int, dt: float = 0.02):
    W = LatticeWindow(half_width)
    w = ConvexityWeight(gamma, c0, r0)
    times = np.linspace(0.0, 1.0, int(round(1.0 / dt)) + 1)
    u0 = extremizer(0.0, 1.0, W)
    states = [free_evolve(u0, t) for t in times]
    return times, states_log_H(states, times, w), states


@_timed
def measured_log_convexity(gamma: float = 2.5, r0: float = 4.0, c0: float | None = None, half_width: int = 64, dt: float = 0.02, n_max: int = 100_000):
    if c0 is None:
        c0 = sweep_c0(gamma, r0, T_GRID_TENTHS, n_max).c0
    lc = fit_convexity_constants(gamma, c0, r0, T_GRID_TENTHS, n_max)
    times, log_H, _ = extremizer_log_H(gamma, c0, r0, half_width, dt)
    rep = second_difference_scan(times, log_H, lc.d, params={"gamma": gamma, "c0": c0, "r0": r0})
    return CriterionResult(
        12,
        "measured log-convexity",
        rep.passed,
        {
            "min_value": rep.margins["second_difference_plus_2C"],
            "at_t": rep.constants["min_t"],
            "two_d": 2.0 * lc.d,
            "c0": c0,
            "C3": lc.c3,
            "C4": lc.c4,
        },
        {"min": -1e-3},
        runtime_limit=60.0,
    )


@_timed
def divergence_mechanism(gamma: float = 2.5, c0: float = 10.0, r0_list=(10.0, 1e2, 1e3, 1e4)):
    rows = vanishing_pressure(gamma, c0, r0_list)
    gaps = [r.gap for r in rows]
    fast, slow = leading_coefficients(gamma)
    increasing = all(b > a for a, b in zip(gaps, gaps[1:]))
    return CriterionResult(
        13,
        "divergence mechanism",
        increasing and fast > slow,
        {"gaps": gaps, "lhs_coefficient": fast, "rhs_coefficient": slow},
        {"strictly_increasing": True},
        runtime_limit=0.1,
    )


ALL = {
    1: extremizer_residual,
    2: propagator_equivalence,
    3: sharpness_constant,
    4: heat_kernel_normalisation,
    5: norm_conservation,
    6: scattering_sanity,
    7: type_estimator,
    8: multiplier_relation,
    9: bridge_inequalities,
    10: quadratic_form,
    11: energy_estimate,
    12: measured_log_convexity,
    13: divergence_mechanism,
}
