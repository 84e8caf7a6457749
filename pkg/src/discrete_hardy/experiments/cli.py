"""Command-line entry point: ``discrete-hardy <subcommand> [flags]``.

Exit status is 0 exactly when every check the run exercised passed and the
tail audit is valid.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ExperimentConfig, load_potential_file
from .scenarios import run

log = logging.getLogger("discrete_hardy")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _tgrid(text: str) -> list[float]:
    """``"0:1:11"`` (start:stop:count) or a comma list."""
    if ":" in text:
        a, b, k = text.split(":")
        k = int(k)
        if k < 2:
            raise argparse.ArgumentTypeError("a t-grid needs at least 2 points")
        return [round(float(a) + (float(b) - float(a)) * i / (k - 1), 12) for i in range(k)]
    return _floats(text)


def _theta_grid(text: str) -> dict:
    """``"0.8,1.25,2:8"``: radii, then the number of angles."""
    radii, _, angles = text.partition(":")
    out = {"theta_radii": _floats(radii)}
    if angles:
        out["theta_angles"] = int(angles)
    return out


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", type=Path, default=d, help="JSON config; CLI flags override it")
    p.add_argument("--out", type=Path, default=d, help="output directory for report.json and CSVs")
    p.add_argument("--seed", type=int, default=d, help="u64 seed for random potentials and forcing")
    p.add_argument("--window", type=int, default=d, help="lattice half width N")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrete-hardy", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="scenario", required=True)

    p = sub.add_parser("evolve", parents=[common], help="time-step a state under V and F")
    p.add_argument("--t1", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--trials", type=int, help="seeded random potentials for the norm check")
    p.add_argument("--potential", type=Path, help='JSON {"support_start": 0, "values": [...]}')
    p.add_argument("--initial", choices=["delta", "extremizer"])
    p.add_argument("--stride", type=int, help="write every k-th time step to trace.csv")

    p = sub.add_parser("extremizer", parents=[common], help="closed-form extremizer, envelopes, engines")
    p.add_argument("--amplitude", type=float)

    p = sub.add_parser("scatter", parents=[common], help="Jost solutions and scattering coefficients")
    p.add_argument("--potential", type=Path, help='JSON {"support_start": 0, "values": [...]}')
    p.add_argument("--theta-grid", type=_theta_grid, help='radii and angle count, e.g. "0.8,1.25,2:8"')

    p = sub.add_parser("convexity", parents=[common], help="coefficient scans for the weight families")
    p.add_argument("--gamma", type=float)
    p.add_argument("--b", type=float, help="bridge exponent; omit to scan the default grid")
    p.add_argument("--c0", type=float, help="fixed C0; omit to sweep")
    p.add_argument("--r0", type=float)
    p.add_argument("--nmax", type=int)
    p.add_argument("--tgrid", type=_tgrid, help='"0:1:11" or a comma list')
    p.add_argument("--no-log-convexity", action="store_true")

    p = sub.add_parser("energy", parents=[common], help="weighted energy estimate with forcing")
    p.add_argument("--alpha", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--v2", type=float, help="sup norm of the imaginary part of V")

    p = sub.add_parser("bessel", parents=[common], help="audit table of log J_n(x)")
    p.add_argument("--nmin", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--x", type=_floats, help="comma list of arguments")

    p = sub.add_parser("type-estimate", parents=[common], help="exponential type from Taylor coefficients")
    p.add_argument("--source", choices=["exp_half", "exp", "extremizer"])
    p.add_argument("--nmin", type=int)
    p.add_argument("--nmax", type=int)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    o: dict = {"params": {}, "time_grid": {}, "tolerances": {}}
    a = vars(args)

    def put(section, key, value):
        if value is not None:
            o[section][key] = value

    if args.seed is not None:
        o["seed"] = args.seed
    if args.window is not None:
        o["window"] = args.window
    if args.out is not None:
        o["out_dir"] = str(args.out)
    if a.get("potential") is not None:
        o["potential"] = load_potential_file(args.potential)
    s = args.scenario
    if s == "evolve":
        put("time_grid", "t1", a.get("t1"))
        put("time_grid", "dt", a.get("dt"))
        put("params", "trials", a.get("trials"))
        put("params", "initial", a.get("initial"))
        put("params", "trace_stride", a.get("stride"))
    elif s == "extremizer":
        put("params", "amplitude", a.get("amplitude"))
    elif s == "scatter":
        if a.get("theta_grid"):
            o["params"].update(a["theta_grid"])
    elif s == "convexity":
        w = {k: a.get(k) for k in ("gamma", "c0", "r0") if a.get(k) is not None}
        if w:
            o["weight"] = w
        put("params", "b", a.get("b"))
        put("params", "nmax", a.get("nmax"))
        put("params", "tgrid", a.get("tgrid"))
        if a.get("no_log_convexity"):
            o["params"]["log_convexity"] = False
    elif s == "energy":
        if a.get("alpha") is not None:
            o["weight"] = {"alpha": a["alpha"]}
        put("params", "trials", a.get("trials"))
        if a.get("v2") is not None:
            o["potential"] = {"imag_sup_norm": a["v2"]}
    elif s == "bessel":
        put("params", "n_min", a.get("nmin"))
        put("params", "n_max", a.get("nmax"))
        put("params", "xs", a.get("x"))
    elif s == "type-estimate":
        put("params", "source", a.get("source"))
        put("params", "n_min", a.get("nmin"))
        put("params", "n_max", a.get("nmax"))
    return {k: v for k, v in o.items() if v != {}}


def _merge_file(cfg_path: Path | None, scenario: str, overrides: dict) -> ExperimentConfig:
    base: dict = {}
    if cfg_path is not None:
        base = json.loads(Path(cfg_path).read_text())
        base.pop("scenario", None)
    cfg = ExperimentConfig.materialize(scenario, base)
    return ExperimentConfig.materialize(scenario, _deep(cfg.to_dict(), overrides))


def _deep(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        out[k] = _deep(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    cfg = _merge_file(args.config, args.scenario, _overrides(args))
    if cfg.out_dir is None:
        cfg.out_dir = str(Path("runs") / f"{cfg.scenario}-seed{cfg.seed}")
    rep = run(cfg)
    for c in rep.criteria:
        log.info("%s %s", "PASS" if c["passed"] else "FAIL", c["name"])
    status = "PASS" if rep.passed else "FAIL"
    print(f"{cfg.scenario}: {status} ({sum(c['passed'] for c in rep.criteria)}/{len(rep.criteria)} checks, "
          f"tail audit {'valid' if rep.tail_audit['valid'] else 'INVALID'}) -> {cfg.out_dir}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
