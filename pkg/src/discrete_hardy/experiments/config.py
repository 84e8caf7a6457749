"""Run configuration and run report.

A config is one JSON document.  Every default a scenario relies on is
written into the config before the run starts, so the echoed config in
``report.json`` is sufficient to reproduce the run.
"""

from __future__ import annotations

import copy
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..evolution import ForcingProvider, PotentialProvider, random_forcing, random_potential
from ..rng import stream
from .criteria import CriterionResult

SCENARIOS = ("evolve", "extremizer", "scatter", "convexity", "energy", "bessel", "type-estimate")

TAIL_AUDIT_LIMIT = 1e-12

_DEFAULTS: dict[str, dict] = {
    "evolve": {
        "window": 64,
        "potential": {"kind": "zero"},
        "forcing": None,
        "weight": None,
        "time_grid": {"t0": 0.0, "t1": 1.0, "dt": 1e-3},
        "params": {"initial": "delta", "trials": 50, "trial_sup_norm": 1.0, "trace_stride": 50},
        "tolerances": {"equivalence": 1e-8, "norm_drift": 1e-9},
    },
    "extremizer": {
        "window": 250,
        "potential": {"kind": "zero"},
        "forcing": None,
        "weight": None,
        "time_grid": {"t0": 0.0, "t1": 1.0, "dt": 1e-3},
        "params": {
            "amplitude": 1.0,
            "residual_window": 60,
            "residual_times": [0.1, 0.3, 0.5, 0.7, 0.9],
            "ratio_band": [0.2, 0.5],
            "ratio_range": [5, 150],
        },
        "tolerances": {"residual": 1e-12, "focus_off_site": 1e-25, "norm": 1e-12, "engines": 1e-8},
    },
    "scatter": {
        "window": 64,
        "potential": {"kind": "random", "sup_norm": 1.0, "sites": [0, 2], "time_dependent": False, "finite_support": True},
        "forcing": None,
        "weight": None,
        "time_grid": {"t0": 0.0, "t1": 1.0, "dt": 1e-3},
        "params": {
            "theta_radii": [0.8, 1.25, 1.6, 2.0],
            "theta_angles": 8,
            "ray_angle": math.pi / 2,
            "ray_radii": [2.0, 16.0, 12],
            "potentials_for_spread": 20,
        },
        "tolerances": {"wronskian_spread": 1e-10, "multiplier": 1e-8, "ray_gap": 0.05, "free_coeffs": 1e-12},
    },
    "convexity": {
        "window": 64,
        "potential": {"kind": "zero"},
        "forcing": None,
        "weight": {"family": "convexity", "gamma": 2.5, "c0": None, "r0": 4.0},
        "time_grid": {"t0": 0.0, "t1": 1.0, "dt": 0.02},
        "params": {
            "b": None,
            "bridge_gammas": [0.5, 1.0, 2.5],
            "bridge_bs": [0.6, 0.75, 0.9],
            "nmax": 100000,
            "tgrid": [round(0.1 * k, 10) for k in range(11)],
            "csv_nmax": 200,
            "c0_start": 2.0,
            "rho_r0": 10.0,
            "pressure_c0": 10.0,
            "pressure_r0": [10.0, 100.0, 1000.0, 10000.0],
            "log_convexity": True,
        },
        "tolerances": {"rho_closed_form": 1e-10, "log_convexity": 1e-3},
    },
    "energy": {
        "window": 64,
        "potential": {"kind": "random", "sup_norm": 1.0, "time_dependent": True, "imag_sup_norm": 0.5},
        "forcing": {"kind": "random", "sup_norm": 1.0, "sites": [-8, 8]},
        "weight": {"family": "energy", "alpha": 0.5},
        "time_grid": {"t0": 0.0, "t1": 1.0, "dt": 1e-3},
        "params": {"trials": 20, "stability_windows": [64, 128], "psipos_nmax": 100000},
        "tolerances": {"C_stability": 0.2},
    },
    "bessel": {
        "window": 0,
        "potential": {"kind": "zero"},
        "forcing": None,
        "weight": None,
        "time_grid": {"t0": 0.0, "t1": 1.0, "dt": 1e-3},
        "params": {"n_min": -20, "n_max": 250, "xs": [0.5, 1.0, 2.0]},
        "tolerances": {"heat_kernel": 1e-14, "sharpness": [0.394, 0.404]},
    },
    "type-estimate": {
        "window": 0,
        "potential": {"kind": "zero"},
        "forcing": None,
        "weight": None,
        "time_grid": {"t0": 0.0, "t1": 1.0, "dt": 1e-3},
        "params": {"source": "exp_half", "n_min": 1, "n_max": 300},
        "tolerances": {"sigma_rel": 0.02},
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    scenario: str
    window: int
    seed: int = 0
    out_dir: str | None = None
    potential: dict = field(default_factory=lambda: {"kind": "zero"})
    forcing: dict | None = None
    weight: dict | None = None
    time_grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if int(self.window) != self.window or self.window < 0:
            raise ValueError("window must be a non-negative integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def materialize(cls, scenario: str, overrides: dict | None = None) -> "ExperimentConfig":
        """Scenario defaults with ``overrides`` merged in (nested dicts merge key-wise)."""
        if scenario not in _DEFAULTS:
            raise ValueError(f"unknown scenario {scenario!r}")
        doc = _merge({"scenario": scenario, "seed": 0, "out_dir": None, **_DEFAULTS[scenario]}, overrides or {})
        doc["scenario"] = scenario
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**copy.deepcopy(d))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    # physical inputs ---------------------------------------------------

    def build_potential(self, key: int = 0, spec: dict | None = None) -> PotentialProvider:
        return build_potential(spec or self.potential, self.seed, self.window, key)

    def build_forcing(self, key: int = 0) -> ForcingProvider | None:
        return build_forcing(self.forcing, self.seed, key)


def build_potential(spec: dict | None, seed: int, window: int, key: int = 0) -> PotentialProvider:
    spec = spec or {"kind": "zero"}
    kind = spec.get("kind", "sites" if "values" in spec else "zero")
    if kind == "zero":
        return PotentialProvider.zero()
    if kind == "sites":
        return PotentialProvider.from_sites(spec["values"], int(spec.get("support_start", 0)))
    if kind == "random":
        lo, hi = spec.get("sites", [-window, window])
        return random_potential(
            stream(seed, 1, key),
            float(spec.get("sup_norm", 1.0)),
            (int(lo), int(hi)),
            time_dependent=bool(spec.get("time_dependent", True)),
            imag_sup_norm=float(spec.get("imag_sup_norm", 0.0)),
            finite_support=bool(spec.get("finite_support", False)),
        )
    raise ValueError(f"unknown potential kind {kind!r}")


def build_forcing(spec: dict | None, seed: int, key: int = 0) -> ForcingProvider | None:
    if not spec or spec.get("kind") == "none":
        return None
    if spec.get("kind") == "random":
        lo, hi = spec.get("sites", [-8, 8])
        return random_forcing(stream(seed, 2, key), float(spec.get("sup_norm", 1.0)), (int(lo), int(hi)))
    raise ValueError(f"unknown forcing kind {spec.get('kind')!r}")


def load_potential_file(path) -> dict:
    """``{"support_start": 0, "values": [...]}`` as a potential spec."""
    doc = json.loads(Path(path).read_text())
    return {"kind": "sites", "support_start": int(doc.get("support_start", 0)), "values": [float(v) for v in doc["values"]]}


@dataclass
class RunReport:
    config: dict
    criteria: list[dict] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    tail_audit: dict = field(default_factory=lambda: {"max_ratio": 0.0, "limit": TAIL_AUDIT_LIMIT, "valid": True})
    wall_time: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def add(self, result: CriterionResult) -> None:
        if any(c["name"] == result.name for c in self.criteria):
            raise ValueError(f"criterion {result.name!r} recorded twice")
        self.criteria.append(result.to_dict())

    def check(self, name: str, passed: bool, measured: dict, threshold: dict) -> None:
        self.add(CriterionResult(None, name, bool(passed), measured, threshold))

    def audit(self, tail: float, norm: float) -> None:
        ratio = tail / norm if norm > 0 else (0.0 if tail == 0 else math.inf)
        self.tail_audit["max_ratio"] = max(self.tail_audit["max_ratio"], float(ratio))
        self.tail_audit["valid"] = self.tail_audit["max_ratio"] <= TAIL_AUDIT_LIMIT

    @property
    def passed(self) -> bool:
        return self.tail_audit["valid"] and all(c["passed"] for c in self.criteria)

    def finish(self) -> "RunReport":
        self.wall_time = time.perf_counter() - self._t0
        return self

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "passed": self.passed,
            "criteria": self.criteria,
            "tail_audit": self.tail_audit,
            "data": self.data,
            "wall_time": self.wall_time,
        }

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(json.dumps(_jsonable(self.to_dict()), indent=2))
        return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
