"""CSV / JSON encodings for states and evolution traces.

Floats are written with ``repr`` so that every value round-trips exactly.
The log-domain columns are authoritative; linear ``re``/``im`` columns are
informational and read as 0.0 once they underflow.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .lattice import LatticeWindow, State
from .logdomain import NEG_INF, LogReal

STATE_COLUMNS = ("n", "re", "im", "log_mag", "phase")
TRACE_COLUMNS = ("t", "n", "re", "im", "log_mag", "phase")
SUMMARY_COLUMNS = ("t", "l2_norm", "log_H")


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _linear(log_mag: float, phase: float) -> tuple[float, float]:
    if log_mag == NEG_INF or log_mag < -745.0:
        return 0.0, 0.0
    r = math.exp(log_mag) if log_mag < 709.0 else math.inf
    return r * math.cos(phase), r * math.sin(phase)


def _site_rows(s: State):
    for n, lm, ph in zip(s.indices.tolist(), s.log_mag.tolist(), s.phase.tolist()):
        re, im = _linear(lm, ph)
        yield n, re, im, lm, ph


def write_csv_rows(path_or_buf, header, rows) -> None:
    if isinstance(path_or_buf, (str, Path)):
        with open(path_or_buf, "w", newline="") as fh:
            write_csv_rows(fh, header, rows)
        return
    w = csv.writer(path_or_buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, str)) and not isinstance(v, bool) else fmt(v) for v in row])


def state_to_csv(s: State, path=None) -> str:
    buf = io.StringIO()
    write_csv_rows(buf, STATE_COLUMNS, _site_rows(s))
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def state_from_csv(text_or_path, tail_bound: LogReal | None = None) -> State:
    text = _read(text_or_path)
    rows = list(csv.DictReader(io.StringIO(text)))
    ns = np.array([int(r["n"]) for r in rows])
    half = int(ns.max())
    if not np.array_equal(ns, np.arange(-half, half + 1)):
        raise ValueError("CSV rows must cover a symmetric window in increasing order")
    log_mag = np.array([float(r["log_mag"]) for r in rows])
    phase = np.array([float(r["phase"]) for r in rows])
    return State(LatticeWindow(half), log_mag, phase, tail_bound or LogReal.zero())


def state_to_json(s: State) -> str:
    doc = {
        "half_width": s.window.half_width,
        "tail_bound": {"sign": s.tail_bound.sign, "log_mag": _json_float(s.tail_bound.log_mag)},
        "sites": [
            {"n": n, "re": re, "im": im, "log_mag": _json_float(lm), "phase": ph}
            for n, re, im, lm, ph in _site_rows(s)
        ],
    }
    return json.dumps(doc, indent=1)


def state_from_json(text_or_path) -> State:
    doc = json.loads(_read(text_or_path))
    window = LatticeWindow(int(doc["half_width"]))
    sites = sorted(doc["sites"], key=lambda r: r["n"])
    log_mag = np.array([_from_json_float(r["log_mag"]) for r in sites])
    phase = np.array([float(r["phase"]) for r in sites])
    tb = doc.get("tail_bound") or {"sign": 0, "log_mag": None}
    tail = LogReal.from_log(_from_json_float(tb["log_mag"]), tb["sign"] or 1)
    return State(window, log_mag, phase, tail)


def trace_rows(times, states):
    for t, s in zip(times, states):
        for row in _site_rows(s):
            yield (float(t),) + row


def _json_float(x: float):
    return None if x == NEG_INF else float(x)


def _from_json_float(x) -> float:
    return NEG_INF if x is None else float(x)


def _read(text_or_path) -> str:
    if isinstance(text_or_path, Path):
        return text_or_path.read_text()
    if isinstance(text_or_path, str) and "\n" not in text_or_path and Path(text_or_path).exists():
        return Path(text_or_path).read_text()
    return text_or_path
