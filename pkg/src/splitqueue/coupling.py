"""Pathwise checks that merging equal-toll servers never loses throughput.

A realized schedule ``L`` is replayed through the split system; the
customers it admits form ``L'``.  The merged single server then replays
``L'`` and ``L``.  Along ``L'`` the merged server's sojourn prediction must
stay below the best split prediction and its workload below the split
total, every ``L'`` customer must be admitted again, and on the full ``L``
the merged server must admit at least ``|L'|`` customers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .engine import Schedule, SimReport, Trace, simulate
from .model import ClassSpec, Scenario, ServerSpec, SystemSpec, is_equal_toll, is_unit_size

TOLERANCE = 1e-9

SOJOURN_BOUND = "F<=min(f)"
WORKLOAD_BOUND = "W<=sum(W)"
ADMISSION = "merged admits L'"


class ScopeError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingViolation:
    epoch: int
    invariant: str
    lhs: float
    rhs: float
    step: int = 0  # induction step of verify_theorem1, 0 for a direct check


@dataclass
class CouplingReport:
    epochs_checked: int = 0
    violations: list[CouplingViolation] = field(default_factory=list)
    admitted_split: int = 0
    admitted_merged_on_L: int = 0
    admitted_merged_on_Lprime: int = 0
    dominance_holds: bool = True
    # induction chain of verify_theorem1; step p merges the first p servers
    steps: list["CouplingReport"] = field(default_factory=list)

    def shared_fields(self) -> dict:
        return {
            "epochs_checked": self.epochs_checked,
            "violations": list(self.violations),
            "admitted_split": self.admitted_split,
            "admitted_merged_on_L": self.admitted_merged_on_L,
            "admitted_merged_on_Lprime": self.admitted_merged_on_Lprime,
            "dominance_holds": self.dominance_holds,
        }


def merge(servers: Sequence[ServerSpec]) -> ServerSpec:
    servers = list(servers)
    if not servers:
        raise ValueError("nothing to merge")
    if any(s.toll != servers[0].toll for s in servers):
        raise ScopeError("equal-toll required")
    if len(servers) == 1:
        return servers[0]
    return ServerSpec(math.fsum(s.rate for s in servers), servers[0].toll)


def merged_system(system: SystemSpec) -> SystemSpec:
    return SystemSpec((merge(system.servers),), system.total_rate)


def admitted_subschedule(trace: Trace, schedule: Schedule) -> Schedule:
    if len(trace) != len(schedule):
        raise ValueError(f"trace has {len(trace)} events, schedule {len(schedule)} arrivals")
    return Schedule(tuple(a for a, e in zip(schedule.arrivals, trace) if e.joined is not None))


def _horizon(schedule: Schedule, horizon: Optional[float]) -> float:
    if horizon is not None:
        return horizon
    return max(schedule.arrivals[-1].time, 1.0) if len(schedule) else 1.0


def _check_scope(system: SystemSpec, classes, schedule: Schedule, allow_variable_sizes: bool):
    if not is_equal_toll(system):
        raise ScopeError("equal-toll required")
    if allow_variable_sizes:
        return
    if not is_unit_size(classes) or any(a.size != 1.0 for a in schedule.arrivals):
        raise ScopeError("Lemma 1 scope is fixed-size")


def verify_lemma1(split: SystemSpec, merged: ServerSpec, schedule: Schedule,
                  classes: Sequence[ClassSpec], *, horizon: Optional[float] = None,
                  allow_variable_sizes: bool = False) -> CouplingReport:
    """Couple a two-server equal-toll system with its merged server on ``schedule``.

    With ``allow_variable_sizes`` the same checks run on non-unit job
    sizes; violations are then findings rather than defects.
    """
    if len(split.servers) != 2:
        raise ValueError("verify_lemma1 needs exactly two split servers")
    _check_scope(split, classes, schedule, allow_variable_sizes)
    expected = merge(split.servers)
    if merged.toll != expected.toll or abs(merged.rate - expected.rate) > TOLERANCE:
        raise ValueError("merged server must have the summed rate and the common toll")
    return _couple(split, merged, schedule, classes, _horizon(schedule, horizon), True)[0]


def _couple(split: SystemSpec, merged: ServerSpec, schedule: Schedule, classes,
            horizon: float, check_invariants: bool):
    s1 = Scenario(classes, split, horizon)
    s2 = Scenario(classes, SystemSpec((merged,), merged.rate), horizon)

    trace1, rep1 = simulate(s1, schedule)
    lprime = admitted_subschedule(trace1, schedule)
    trace2, rep2 = simulate(s2, lprime)
    _, rep_full = simulate(s2, schedule)

    violations = []
    if check_invariants:
        joined = [e for e in trace1 if e.joined is not None]
        for k, (e1, e2) in enumerate(zip(joined, trace2)):
            F, f = e2.sojourn[0], min(e1.sojourn)
            if not F <= f + TOLERANCE:
                violations.append(CouplingViolation(k, SOJOURN_BOUND, F, f))
            W, Wsum = e2.workload[0], math.fsum(e1.workload)
            if not W <= Wsum + TOLERANCE:
                violations.append(CouplingViolation(k, WORKLOAD_BOUND, W, Wsum))
            if e2.joined is None:
                violations.append(CouplingViolation(k, ADMISSION, e2.utility[0], 0.0))

    report = CouplingReport(
        epochs_checked=len(lprime) if check_invariants else 0,
        violations=violations,
        admitted_split=rep1.admitted,
        admitted_merged_on_L=rep_full.admitted,
        admitted_merged_on_Lprime=rep2.admitted,
    )
    report.dominance_holds = (report.admitted_merged_on_L >= report.admitted_split
                              and not report.violations)
    return report, (rep1, rep_full), trace1


def verify_theorem1(split: SystemSpec, schedule: Schedule, classes: Sequence[ClassSpec], *,
                    horizon: Optional[float] = None,
                    allow_variable_sizes: bool = False) -> CouplingReport:
    """Compare an m-server equal-toll split with the single merged server.

    Besides the direct comparison, the induction chain is replayed: for
    ``p = 1 .. m-1`` the first ``p`` servers are merged and coupled, as a
    two-server system, against server ``p + 1``.
    """
    return theorem1_with_reports(split, schedule, classes, horizon=horizon,
                                 allow_variable_sizes=allow_variable_sizes)[0]


def theorem1_with_reports(split: SystemSpec, schedule: Schedule, classes, *,
                          horizon: Optional[float] = None,
                          allow_variable_sizes: bool = False
                          ) -> tuple[CouplingReport, tuple[SimReport, SimReport], Trace]:
    """``verify_theorem1`` plus the split/merged SimReports and the split trace."""
    _check_scope(split, classes, schedule, allow_variable_sizes)
    H = _horizon(schedule, horizon)
    m = len(split.servers)
    merged = merge(split.servers)

    # the two-server case is the lemma itself
    top, reports, trace = _couple(split, merged, schedule, classes, H, check_invariants=(m == 2))
    if m <= 2:
        if m == 2:
            top.steps = [CouplingReport(**top.shared_fields())]
        return top, reports, trace

    for p in range(1, m):
        pair = SystemSpec((merge(split.servers[:p]), split.servers[p]),
                          math.fsum(s.rate for s in split.servers[:p + 1]))
        step, _, _ = _couple(pair, merge(pair.servers), schedule, classes, H, True)
        top.steps.append(step)
        top.epochs_checked += step.epochs_checked
        top.violations.extend(replace(v, step=p) for v in step.violations)
    top.dominance_holds = (top.admitted_merged_on_L >= top.admitted_split
                           and all(s.dominance_holds for s in top.steps)
                           and not top.violations)
    return top, reports, trace
