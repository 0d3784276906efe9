"""Command-line entry point.

Exit codes: 0 success, 1 usage or config error, 2 a verify command found
invariant violations or lost dominance (reports are still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from . import serialize as io
from .arrivals import ScheduleFamily, scenario_schedule
from .config import ConfigError, dump_scenario, load_scenario
from .coupling import ScopeError, theorem1_with_reports
from .engine import simulate
from .model import Scenario
from .optimize import FIXED_SIZE_SPACE, HuntSpace, find_optn, hunt_counterexample

log = logging.getLogger("splitqueue")

COMMANDS = ("simulate", "verify-lemma1", "verify-theorem1", "optimize", "hunt")


@dataclass
class RunConfig:
    command: str
    scenario: Optional[Path]
    out: Path
    seed: Optional[int] = None
    reps: int = 8
    budget: int = 200
    grid: Optional[tuple[float, float, float]] = None
    sizes: str = "variable"


def _grid(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("grid needs step > 0 and hi >= lo")
    return lo, hi, step


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="splitqueue",
                                description="Toll-queue splitting simulator and verifier.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--scenario", type=Path, required=(name != "hunt"))
        sp.add_argument("--out", type=Path, required=True)
        sp.add_argument("--seed", type=_u64)
        sp.add_argument("--reps", type=int, default=8 if name == "optimize" else 4)
        if name == "optimize":
            sp.add_argument("--grid", type=_grid)
        if name == "hunt":
            sp.add_argument("--budget", type=int, default=200)
            sp.add_argument("--sizes", choices=("fixed", "variable"), default="variable")
    return p


def _load(config: RunConfig) -> Scenario:
    scenario = load_scenario(config.scenario)
    if config.seed is not None:
        scenario = replace(scenario, seed=config.seed)
    return scenario


def _simulate(config: RunConfig) -> int:
    scenario = _load(config)
    schedule = scenario_schedule(scenario)
    trace, report = simulate(scenario, schedule)
    io.write_schedule_csv(config.out / "schedule.csv", schedule)
    io.write_trace_csv(config.out / "trace.csv", trace, schedule, len(scenario.system.servers))
    io.write_jsonl(config.out / "report.jsonl", [io.sim_report_record(report)])
    log.info("admitted %d, balked %d, revenue rate %.6g",
             report.admitted, report.balked, report.revenue_rate)
    return 0


def _verify(config: RunConfig) -> int:
    scenario = _load(config)
    m = len(scenario.system.servers)
    if config.command == "verify-lemma1" and m != 2:
        raise ConfigError(f"verify-lemma1 needs exactly 2 servers, scenario has {m}")
    schedule = scenario_schedule(scenario)
    report, (split_rep, merged_rep), trace = theorem1_with_reports(
        scenario.system, schedule, scenario.classes, horizon=scenario.horizon)

    label = "lemma1" if config.command == "verify-lemma1" else "theorem1"
    io.write_schedule_csv(config.out / "schedule.csv", schedule)
    io.write_trace_csv(config.out / "trace.csv", trace, schedule, m)
    io.write_violations_csv(config.out / "violations.csv", report.violations)
    io.write_jsonl(config.out / "report.jsonl", [
        io.coupling_report_record(report, label),
        io.sim_report_record(split_rep, "split_sim_report"),
        io.sim_report_record(merged_rep, "merged_sim_report"),
    ])
    log.info("%s: %d epochs, %d violations, split %d vs merged %d admitted",
             label, report.epochs_checked, len(report.violations),
             report.admitted_split, report.admitted_merged_on_L)
    return 0 if report.dominance_holds else 2


def _optimize(config: RunConfig) -> int:
    scenario = _load(config)
    top = max(c.reward for c in scenario.classes)
    lo, hi, step = config.grid or (0.0, top, top / 40.0)
    n = int(round((hi - lo) / step))
    grid = [lo + k * step for k in range(n + 1)]
    family = ScheduleFamily(scenario.classes, scenario.horizon, scenario.seed)
    result = find_optn(scenario.system.total_rate, scenario.classes, family, grid, config.reps)
    io.write_curve_csv(config.out / "curve.csv", result.curve)
    io.write_jsonl(config.out / "report.jsonl", [{
        "kind": "toll_search", "total_rate": scenario.system.total_rate,
        "best_toll": result.best_toll, "best_revenue_rate": result.best_revenue_rate,
        "replications": config.reps, "grid": [lo, hi, step],
    }])
    log.info("best toll %.6g, revenue rate %.6g", result.best_toll, result.best_revenue_rate)
    return 0


def _hunt(config: RunConfig) -> int:
    space = FIXED_SIZE_SPACE if config.sizes == "fixed" else HuntSpace()
    seed = config.seed
    if config.scenario is not None:
        scenario = load_scenario(config.scenario)
        mu = scenario.system.total_rate
        space = replace(space, total_rate=(mu, mu),
                        servers=(2, max(2, len(scenario.system.servers))))
        if seed is None:
            seed = scenario.seed
    space = replace(space, replications=config.reps)
    seed = seed or 0
    findings = hunt_counterexample(space, config.budget, seed)
    io.write_findings_csv(config.out / "findings.csv", findings, dump_scenario)
    io.write_jsonl(config.out / "report.jsonl", [{
        "kind": "hunt", "budget": config.budget, "seed": seed, "sizes": config.sizes,
        "replications": config.reps, "findings": len(findings),
    }])
    log.info("hunt: %d findings in %d instances", len(findings), config.budget)
    return 0


_DISPATCH = {"simulate": _simulate, "verify-lemma1": _verify, "verify-theorem1": _verify,
             "optimize": _optimize, "hunt": _hunt}


def run(config: RunConfig) -> int:
    if config.command not in _DISPATCH:
        log.error("unknown command %r", config.command)
        return 1
    if config.reps < 1 or config.budget < 1:
        log.error("--reps and --budget must be >= 1")
        return 1
    try:
        config.out.mkdir(parents=True, exist_ok=True)
        return _DISPATCH[config.command](config)
    except (ConfigError, ScopeError, OSError) as exc:
        log.error("%s", exc)
        return 1


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    config = RunConfig(
        command=args.command, scenario=args.scenario, out=args.out, seed=args.seed,
        reps=args.reps, budget=getattr(args, "budget", 200),
        grid=getattr(args, "grid", None), sizes=getattr(args, "sizes", "variable"),
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
