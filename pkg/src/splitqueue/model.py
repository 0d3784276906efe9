"""Domain types for multi-server toll queues with balking customers.

Time is in seconds, work in work units (a server of rate ``mu`` completes
``w`` units in ``w / mu`` seconds), money in plain currency units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

SPLIT_TOLERANCE = 1e-9

ARRIVAL_PROCESSES = ("poisson", "fixed")


# -- job-size models -------------------------------------------------------

@dataclass(frozen=True)
class FixedSize:
    size: float = 1.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, float(self.size))

    def problems(self) -> list[str]:
        return [] if _positive(self.size) else ["fixed size must be > 0"]

    @property
    def is_unit(self) -> bool:
        return self.size == 1.0


@dataclass(frozen=True)
class ExponentialSize:
    mean: float

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(self.mean, size=n)

    def problems(self) -> list[str]:
        return [] if _positive(self.mean) else ["exponential mean must be > 0"]

    is_unit = False


@dataclass(frozen=True)
class TwoPointSize:
    """Size ``a`` with probability ``p``, otherwise ``b``."""

    a: float
    b: float
    p: float

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        return np.where(u < self.p, float(self.a), float(self.b))

    def problems(self) -> list[str]:
        out = []
        if not (_positive(self.a) and _positive(self.b)):
            out.append("two-point sizes must be > 0")
        if not (0.0 <= self.p <= 1.0):
            out.append("two-point probability must lie in [0, 1]")
        return out

    @property
    def is_unit(self) -> bool:
        return (self.a == 1.0 or self.p == 0.0) and (self.b == 1.0 or self.p == 1.0)


@dataclass(frozen=True)
class EmpiricalSize:
    values: tuple[float, ...]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(np.asarray(self.values, dtype=float), size=n)

    def problems(self) -> list[str]:
        if not self.values:
            return ["empirical size list must be nonempty"]
        if not all(_positive(v) for v in self.values):
            return ["empirical sizes must be > 0"]
        return []

    @property
    def is_unit(self) -> bool:
        return all(v == 1.0 for v in self.values)


SizeModel = Union[FixedSize, ExponentialSize, TwoPointSize, EmpiricalSize]


# -- classes, servers, systems ---------------------------------------------

@dataclass(frozen=True)
class ClassSpec:
    id: int
    arrival_rate: float
    reward: float
    waiting_cost: float
    size_model: SizeModel = field(default_factory=FixedSize)
    # "poisson" or "fixed" (deterministic gaps of 1 / arrival_rate)
    arrival_process: str = "poisson"


@dataclass(frozen=True)
class ServerSpec:
    rate: float
    toll: float


@dataclass(frozen=True)
class SystemSpec:
    servers: tuple[ServerSpec, ...]
    total_rate: float

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(self.servers))

    @classmethod
    def split(cls, rates, toll: float) -> "SystemSpec":
        """Equal-toll system whose total rate is the sum of ``rates``."""
        rates = [float(r) for r in rates]
        return cls(tuple(ServerSpec(r, toll) for r in rates), math.fsum(rates))

    @property
    def rates(self) -> list[float]:
        return [s.rate for s in self.servers]

    @property
    def tolls(self) -> list[float]:
        return [s.toll for s in self.servers]


@dataclass(frozen=True)
class Scenario:
    classes: tuple[ClassSpec, ...]
    system: SystemSpec
    horizon: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))

    def class_by_id(self) -> dict[int, ClassSpec]:
        return {c.id: c for c in self.classes}


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _positive(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and x > 0


def validate_system(system: SystemSpec) -> list[Violation]:
    out = []
    if not system.servers:
        out.append(Violation("servers", "servers nonempty"))
    for j, s in enumerate(system.servers):
        if not _positive(s.rate):
            out.append(Violation(f"servers[{j}].rate", "rate must be > 0"))
        if not (math.isfinite(s.toll) and s.toll >= 0):
            out.append(Violation(f"servers[{j}].toll", "toll must be >= 0"))
    if not _positive(system.total_rate):
        out.append(Violation("total_rate", "total_rate must be > 0"))
    elif system.servers:
        total = math.fsum(system.rates)
        if abs(total - system.total_rate) > SPLIT_TOLERANCE:
            out.append(Violation(
                "total_rate",
                f"split constraint: server rates sum to {total!r}, "
                f"total_rate is {system.total_rate!r}",
            ))
    return out


def validate(scenario: Scenario) -> ValidationResult:
    """Collect every violated invariant of ``scenario``; never raises."""
    out = []
    if not scenario.classes:
        out.append(Violation("classes", "classes nonempty"))
    seen = set()
    for i, c in enumerate(scenario.classes):
        p = f"classes[{i}]"
        if c.id in seen:
            out.append(Violation(f"{p}.id", f"duplicate class id {c.id}"))
        seen.add(c.id)
        if not _positive(c.arrival_rate):
            out.append(Violation(f"{p}.rate", "arrival rate must be > 0"))
        if not _positive(c.reward):
            out.append(Violation(f"{p}.reward", "reward must be > 0"))
        if not _positive(c.waiting_cost):
            out.append(Violation(f"{p}.cost", "waiting cost must be > 0"))
        for msg in c.size_model.problems():
            out.append(Violation(f"{p}.size", msg))
        if c.arrival_process not in ARRIVAL_PROCESSES:
            out.append(Violation(f"{p}.arrivals",
                                 f"unknown arrival process {c.arrival_process!r}"))
    out.extend(validate_system(scenario.system))
    if not _positive(scenario.horizon):
        out.append(Violation("horizon", "horizon must be > 0"))
    if not (isinstance(scenario.seed, int) and 0 <= scenario.seed < 2**64):
        out.append(Violation("seed", "seed must be an unsigned 64-bit integer"))
    return ValidationResult(tuple(out))


def is_equal_toll(system: SystemSpec) -> bool:
    tolls = system.tolls
    return all(t == tolls[0] for t in tolls)


def is_unit_size(classes) -> bool:
    return all(c.size_model.is_unit for c in classes)
