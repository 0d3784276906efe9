"""Seeded arrival schedules.

Every random draw comes from a numpy ``Generator`` keyed by
``(seed, purpose, class_id)``, so each class owns its own stream and
adding a class never perturbs the draws of another.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .engine import Arrival, Schedule
from .model import ClassSpec

_ARRIVAL_STREAM = 0
_SIZE_STREAM = 1


def stream(seed: int, purpose: int, class_id: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(purpose, int(class_id)))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit child seed of ``seed`` (used for replications and instances)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


# -- interarrival distributions --------------------------------------------

@dataclass(frozen=True)
class ExponentialGaps:
    rate: float

    def draw(self, rng, n):
        return rng.exponential(1.0 / self.rate, size=n)

    def mean(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class FixedGaps:
    gap: float

    def draw(self, rng, n):
        return np.full(n, float(self.gap))

    def mean(self):
        return self.gap


@dataclass(frozen=True)
class UniformGaps:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 < self.lo <= self.hi):
            raise ValueError("uniform gaps need 0 < lo <= hi")

    def draw(self, rng, n):
        return rng.uniform(self.lo, self.hi, size=n)

    def mean(self):
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class EmpiricalGaps:
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values or min(self.values) <= 0:
            raise ValueError("empirical gaps must be a nonempty list of positive values")

    def draw(self, rng, n):
        return rng.choice(np.asarray(self.values, dtype=float), size=n)

    def mean(self):
        return float(np.mean(self.values))


InterarrivalDist = Union[ExponentialGaps, FixedGaps, UniformGaps, EmpiricalGaps]


def class_interarrival(cls: ClassSpec) -> InterarrivalDist:
    if cls.arrival_process == "fixed":
        return FixedGaps(1.0 / cls.arrival_rate)
    return ExponentialGaps(cls.arrival_rate)


# -- generators ------------------------------------------------------------

def gen_deterministic(times: Iterable[float], class_id: int = 0) -> Schedule:
    times = [float(t) for t in times]
    for k, t in enumerate(times):
        if t < 0:
            raise ValueError(f"negative arrival time at position {k}")
        if k and t < times[k - 1]:
            raise ValueError(f"decreasing arrival times at position {k}")
    return Schedule(tuple(Arrival(t, class_id, 0.0) for t in times))


def gen_renewal(dist: InterarrivalDist, horizon: float, class_id: int,
                seed: int) -> Schedule:
    """Cumulative sums of i.i.d. gaps, keeping epochs strictly before ``horizon``."""
    rng = stream(seed, _ARRIVAL_STREAM, class_id)
    chunk = max(16, int(1.1 * horizon / dist.mean()) + 16)
    pieces = []
    t = 0.0
    while True:
        epochs = t + np.cumsum(dist.draw(rng, chunk))
        if epochs[-1] >= horizon:
            pieces.append(epochs[epochs < horizon])
            break
        pieces.append(epochs)
        t = float(epochs[-1])
    times = np.concatenate(pieces)
    return Schedule(tuple(Arrival(float(x), class_id, 0.0) for x in times))


def superpose(schedules: Iterable[Schedule]) -> Schedule:
    """Merge sorted schedules; equal times keep the order of the input streams."""
    keyed = (
        [(a.time, s, k, a) for k, a in enumerate(sched.arrivals)]
        for s, sched in enumerate(schedules)
    )
    return Schedule(tuple(item[3] for item in heapq.merge(*keyed)))


def realize_sizes(schedule: Schedule, classes: Iterable[ClassSpec],
                  seed: int) -> Schedule:
    by_id = {c.id: c for c in classes}
    positions: dict[int, list[int]] = {}
    for k, a in enumerate(schedule.arrivals):
        if a.class_id not in by_id:
            raise ValueError(f"arrival {k} has unknown class id {a.class_id}")
        positions.setdefault(a.class_id, []).append(k)
    sizes = [0.0] * len(schedule)
    for cid, ks in positions.items():
        draws = by_id[cid].size_model.sample(stream(seed, _SIZE_STREAM, cid), len(ks))
        for k, x in zip(ks, draws):
            sizes[k] = float(x)
    return Schedule(tuple(a._replace(size=x) for a, x in zip(schedule.arrivals, sizes)))


@dataclass(frozen=True)
class ScheduleFamily:
    """Seeded family of realized schedules, one per replication index."""

    classes: tuple[ClassSpec, ...]
    horizon: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))

    def realize(self, replication: int = 0) -> Schedule:
        seed = derive_seed(self.seed, replication)
        parts = [gen_renewal(class_interarrival(c), self.horizon, c.id, seed)
                 for c in self.classes]
        return realize_sizes(superpose(parts), self.classes, seed)


def default_horizon(classes: Iterable[ClassSpec], expected_arrivals: float = 1e4) -> float:
    return expected_arrivals / sum(c.arrival_rate for c in classes)


def scenario_schedule(scenario, replication: int = 0) -> Schedule:
    return ScheduleFamily(scenario.classes, scenario.horizon, scenario.seed).realize(replication)
