"""Replay of an arrival schedule through a multi-server toll system.

Each server is summarised by its remaining workload ``V``.  Between
arrivals the workload drains at the server rate and is floored at zero;
an arriving customer with job size ``w`` sees the sojourn prediction
``(V + w) / mu`` at every server, joins the server of highest utility
``R - toll - c * sojourn`` when that utility is strictly positive, and
balks otherwise.  Ties go to the lowest server index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .model import ClassSpec, Scenario, ServerSpec


class ClockError(ValueError):
    pass


class Arrival(NamedTuple):
    time: float
    class_id: int
    size: float


@dataclass(frozen=True)
class Schedule:
    arrivals: tuple[Arrival, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arrivals", tuple(self.arrivals))

    def __len__(self) -> int:
        return len(self.arrivals)

    def __iter__(self):
        return iter(self.arrivals)

    def __getitem__(self, i):
        return self.arrivals[i]

    @property
    def times(self) -> list[float]:
        return [a.time for a in self.arrivals]

    def is_sorted(self) -> bool:
        a = self.arrivals
        return all(a[k].time <= a[k + 1].time for k in range(len(a) - 1))


@dataclass(frozen=True)
class ServerState:
    workload: float = 0.0
    last_update: float = 0.0


class TraceEvent(NamedTuple):
    index: int
    workload: tuple[float, ...]   # pre-arrival V_j
    sojourn: tuple[float, ...]    # pre-arrival f_j = (V_j + w) / mu_j
    utility: tuple[float, ...]
    joined: Optional[int]         # server index, None for a balk

    @property
    def balked(self) -> bool:
        return self.joined is None


Trace = list


@dataclass(frozen=True)
class SimReport:
    admitted: int
    balked: int
    admitted_per_server: tuple[int, ...]
    admitted_work: float
    completed_work: float
    residual_work: float
    horizon: float
    throughput_rate: float
    revenue: float
    revenue_rate: float


# -- single-step primitives ------------------------------------------------

def decay(state: ServerState, to_time: float, rate: float) -> ServerState:
    if to_time < state.last_update:
        raise ClockError(
            f"non-monotonic clock: {to_time!r} < {state.last_update!r}")
    w = state.workload - rate * (to_time - state.last_update)
    return ServerState(w if w > 0.0 else 0.0, to_time)


def predict_sojourn(state: ServerState, size: float, rate: float) -> float:
    return (state.workload + size) / rate


def utility(cls: ClassSpec, server: ServerSpec, sojourn: float) -> float:
    return cls.reward - server.toll - cls.waiting_cost * sojourn


def choose(utilities: Sequence[float]) -> Optional[int]:
    """Lowest-index maximiser if its utility is strictly positive, else None."""
    best = max(utilities)
    if best > 0.0:
        return list(utilities).index(best)
    return None


def decide(arrival: Arrival, states: Sequence[ServerState],
           scenario: Scenario) -> Optional[int]:
    cls = scenario.class_by_id()[arrival.class_id]
    servers = scenario.system.servers
    utilities = [utility(cls, s, predict_sojourn(st, arrival.size, s.rate))
                 for s, st in zip(servers, states)]
    return choose(utilities)


def apply(state: ServerState, size: float) -> ServerState:
    return ServerState(state.workload + size, state.last_update)


# -- full replay -----------------------------------------------------------

def simulate(scenario: Scenario, schedule: Schedule) -> tuple[Trace, SimReport]:
    """Replay ``schedule`` through ``scenario.system`` from an empty state.

    The loops inline decay / predict_sojourn / utility / choose / apply on
    plain floats; the result is identical to composing those primitives.
    Work still in the system is drained until ``max(horizon, last arrival)``.
    """
    servers = scenario.system.servers
    m = len(servers)
    rates = [s.rate for s in servers]
    tolls = [s.toll for s in servers]
    classes = scenario.class_by_id()
    span = range(m)

    V = [0.0] * m
    done = [0.0] * m
    count = [0] * m
    trace = []

    if m == 1:
        last, balked, admitted_work = _replay_single(
            schedule, classes, rates[0], tolls[0], V, done, count, trace)
    else:
        last, balked, admitted_work = _replay_many(
            schedule, classes, rates, tolls, V, done, count, trace)

    end = max(scenario.horizon, last)
    for j in span:
        v = V[j]
        nv = v - rates[j] * (end - last)
        if nv < 0.0:
            nv = 0.0
        done[j] += v - nv
        V[j] = nv

    admitted = sum(count)
    revenue = toll_revenue(tolls, count)
    H = scenario.horizon
    report = SimReport(
        admitted=admitted,
        balked=balked,
        admitted_per_server=tuple(count),
        admitted_work=admitted_work,
        completed_work=sum(done),
        residual_work=sum(V),
        horizon=H,
        throughput_rate=admitted / H,
        revenue=revenue,
        revenue_rate=revenue / H,
    )
    return trace, report


def _replay_single(schedule, classes, rate, toll, V, done, count, trace):
    # same arithmetic as _replay_many with m = 1, minus the per-server lists
    v = 0.0
    completed = 0.0
    admitted_work = 0.0
    n = balked = 0
    last = 0.0
    for k, (t, cid, w) in enumerate(schedule.arrivals):
        if t < last:
            raise ClockError(f"unsorted schedule at arrival {k}: {t!r} < {last!r}")
        dt = t - last
        if dt > 0.0 and v > 0.0:
            nv = v - rate * dt
            if nv < 0.0:
                nv = 0.0
            completed += v - nv
            v = nv
        last = t
        try:
            cls = classes[cid]
        except KeyError:
            raise ValueError(f"arrival {k} has unknown class id {cid}") from None
        f = (v + w) / rate
        u = cls.reward - toll - cls.waiting_cost * f
        if u > 0.0:
            trace.append(TraceEvent(k, (v,), (f,), (u,), 0))
            v += w
            n += 1
            admitted_work += w
        else:
            balked += 1
            trace.append(TraceEvent(k, (v,), (f,), (u,), None))
    V[0] = v
    done[0] = completed
    count[0] = n
    return last, balked, admitted_work


def _replay_many(schedule, classes, rates, tolls, V, done, count, trace):
    span = range(len(rates))
    admitted_work = 0.0
    balked = 0
    last = 0.0
    for k, (t, cid, w) in enumerate(schedule.arrivals):
        if t < last:
            raise ClockError(f"unsorted schedule at arrival {k}: {t!r} < {last!r}")
        dt = t - last
        if dt > 0.0:
            for j in span:
                v = V[j]
                if v > 0.0:
                    nv = v - rates[j] * dt
                    if nv < 0.0:
                        nv = 0.0
                    done[j] += v - nv
                    V[j] = nv
        last = t
        try:
            cls = classes[cid]
        except KeyError:
            raise ValueError(f"arrival {k} has unknown class id {cid}") from None
        R, c = cls.reward, cls.waiting_cost
        f = tuple([(V[j] + w) / rates[j] for j in span])
        u = tuple([R - tolls[j] - c * f[j] for j in span])
        best = max(u)
        if best > 0.0:
            j = u.index(best)
            pre = tuple(V)
            V[j] += w
            count[j] += 1
            admitted_work += w
            trace.append(TraceEvent(k, pre, f, u, j))
        else:
            balked += 1
            trace.append(TraceEvent(k, tuple(V), f, u, None))

    return last, balked, admitted_work


def toll_revenue(tolls: Sequence[float], counts: Sequence[int]) -> float:
    """Sum of toll * admissions, grouping servers that charge the same toll.

    Grouping makes an equal-toll system's revenue exactly ``toll * total``,
    so revenue comparisons between systems with one common toll reduce to
    integer comparisons of admission counts.
    """
    by_toll: dict[float, int] = {}
    for t, n in zip(tolls, counts):
        by_toll[t] = by_toll.get(t, 0) + n
    return math.fsum(t * n for t, n in by_toll.items())


def admitted_count(scenario: Scenario, schedule: Schedule) -> int:
    return simulate(scenario, schedule)[1].admitted
