"""CSV and JSON-lines writers.

Floats are written with 17 significant digits, enough to reload every
double bit-exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path

from .engine import Arrival, Schedule, SimReport, Trace


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    if is_dataclass(v):
        v = {f.name: getattr(v, f.name) for f in fields(v)}
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def json_line(record: dict) -> str:
    return _json_value(record)


def write_jsonl(path: Path, records) -> None:
    with open(path, "w", newline="\n") as fh:
        for r in records:
            fh.write(json_line(r) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


# -- schedules -------------------------------------------------------------

def write_schedule_csv(path: Path, schedule: Schedule) -> None:
    _write_csv(path, ["time", "class_id", "size"], schedule.arrivals)


def read_schedule_csv(path: Path) -> Schedule:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return Schedule(tuple(Arrival(float(r["time"]), int(r["class_id"]), float(r["size"]))
                          for r in rows))


# -- traces and reports ----------------------------------------------------

def decision_label(joined) -> str:
    """``balk`` or ``join:<j>`` with the 1-based server number of the f_j columns."""
    return "balk" if joined is None else f"join:{joined + 1}"


def write_trace_csv(path: Path, trace: Trace, schedule: Schedule, n_servers: int) -> None:
    header = (["index", "time", "class_id", "size"]
              + [f"f_{j + 1}" for j in range(n_servers)]
              + [f"u_{j + 1}" for j in range(n_servers)]
              + ["decision"])
    rows = ([e.index, a.time, a.class_id, a.size, *e.sojourn, *e.utility, decision_label(e.joined)]
            for e, a in zip(trace, schedule.arrivals))
    _write_csv(path, header, rows)


def sim_report_record(report: SimReport, label: str = "sim_report") -> dict:
    return {"kind": label, **asdict(report)}


def coupling_report_record(report, label: str = "coupling_report") -> dict:
    rec = {"kind": label}
    rec.update(report.shared_fields())
    rec["violations"] = len(report.violations)
    rec["steps"] = [
        {"step": p, "epochs_checked": s.epochs_checked, "violations": len(s.violations),
         "admitted_split": s.admitted_split, "admitted_merged_on_L": s.admitted_merged_on_L,
         "admitted_merged_on_Lprime": s.admitted_merged_on_Lprime,
         "dominance_holds": s.dominance_holds}
        for p, s in enumerate(report.steps, start=1)
    ]
    return rec


def write_violations_csv(path: Path, violations) -> None:
    _write_csv(path, ["step", "epoch", "invariant", "lhs", "rhs"],
               ([v.step, v.epoch, v.invariant, v.lhs, v.rhs] for v in violations))


def write_curve_csv(path: Path, curve) -> None:
    _write_csv(path, ["toll", "revenue_rate", "std_error"], curve)


def write_findings_csv(path: Path, findings, scenario_text) -> None:
    """One row per finding; ``scenario`` holds the replayable config text."""
    _write_csv(path,
               ["seed", "split_revenue_rate", "merged_revenue_rate", "margin",
                "std_error", "replications", "scenario"],
               ([f.seed, f.split_revenue_rate, f.merged_revenue_rate, f.margin,
                 f.std_error, f.replications, scenario_text(f.scenario)] for f in findings))
