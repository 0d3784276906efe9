"""Revenue estimation, single-server toll search and the split-vs-merged hunter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .arrivals import ScheduleFamily, derive_seed
from .coupling import ScopeError, merged_system
from .engine import Schedule, SimReport, Trace, simulate, toll_revenue
from .model import (
    ClassSpec, EmpiricalSize, ExponentialSize, FixedSize, Scenario, ServerSpec,
    SystemSpec, TwoPointSize, is_equal_toll, is_unit_size,
)

WARMUP_FRACTION = 0.1
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def revenue_rate(report: SimReport, tolls: Optional[Sequence[float]] = None) -> float:
    if tolls is None:
        return report.revenue / report.horizon
    return toll_revenue(tolls, report.admitted_per_server) / report.horizon


def windowed_revenue_rate(trace: Trace, schedule: Schedule, tolls: Sequence[float],
                          horizon: float, warmup: float = WARMUP_FRACTION) -> float:
    """Revenue per second from arrivals at or after ``warmup * horizon``."""
    start = warmup * horizon
    total = 0.0
    for e, a in zip(trace, schedule.arrivals):
        if e.joined is not None and a.time >= start:
            total += tolls[e.joined]
    return total / (horizon - start)


def join_threshold(cls: ClassSpec, server: ServerSpec) -> float:
    """Workload below which a unit-size customer joins a lone server."""
    return server.rate * (cls.reward - server.toll) / cls.waiting_cost - 1.0


def _mean_se(values) -> tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


# -- toll search for the unsplit server ------------------------------------

@dataclass
class TollSearchResult:
    best_toll: float
    best_revenue_rate: float
    curve: list[tuple[float, float, float]] = field(default_factory=list)


def golden_section_max(func, lo: float, hi: float, tol: float):
    """Maximise ``func`` on ``[lo, hi]``; returns every ``(x, func(x))`` evaluated."""
    seen = []

    def f(x):
        y = func(x)
        seen.append((x, y))
        return y

    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a >= tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return seen


def find_optn(total_rate: float, classes: Sequence[ClassSpec], family: ScheduleFamily,
              toll_grid: Sequence[float], replications: int = 8,
              warmup: float = WARMUP_FRACTION) -> TollSearchResult:
    """Best toll for the single server of rate ``total_rate``.

    Every toll is scored on the same ``replications`` realized schedules,
    so the curve is free of between-toll sampling noise.  After the grid
    pass, golden-section search runs between the grid neighbours of the
    best grid toll until the bracket is below a hundredth of the step.
    """
    grid = [float(t) for t in toll_grid]
    if not grid:
        raise ValueError("toll grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("toll grid must be strictly increasing")
    if replications < 1:
        raise ValueError("replications must be >= 1")

    schedules = [family.realize(r) for r in range(replications)]
    H = family.horizon
    cache: dict[float, tuple[float, float]] = {}

    def score(toll: float) -> tuple[float, float]:
        if toll not in cache:
            scen = Scenario(classes, SystemSpec((ServerSpec(total_rate, toll),), total_rate), H)
            rates = [windowed_revenue_rate(simulate(scen, s)[0], s, [toll], H, warmup)
                     for s in schedules]
            cache[toll] = _mean_se(rates)
        return cache[toll]

    for t in grid:
        score(t)
    i = max(range(len(grid)), key=lambda k: (score(grid[k])[0], -k))
    if len(grid) > 1:
        step = min(b - a for a, b in zip(grid, grid[1:]))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        golden_section_max(lambda t: score(t)[0], lo, hi, step / 100.0)

    curve = sorted((t, m, se) for t, (m, se) in cache.items())
    best = max(curve, key=lambda p: p[1])
    return TollSearchResult(best[0], best[1], curve)


# -- split versus merged ---------------------------------------------------

@dataclass
class SplitComparison:
    split_rates: list[float]
    merged_rates: list[float]
    margins: list[float]           # split minus merged, per replication
    mean_margin: float
    std_error: float
    fixed_size: bool
    # True/False only on unit-size instances; None where no claim applies
    merged_dominates: Optional[bool]


def compare_split(split: SystemSpec, classes: Sequence[ClassSpec], family: ScheduleFamily,
                  replications: int = 8) -> SplitComparison:
    """Revenue rates of ``split`` and its merged server on identical schedules.

    Rates run over the whole horizon from an empty system, the setting in
    which merged throughput dominates pathwise; no warm-up is discarded.
    """
    if not is_equal_toll(split):
        raise ScopeError("equal-toll required")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    merged = merged_system(split)
    H = family.horizon
    s_split = Scenario(classes, split, H)
    s_merged = Scenario(classes, merged, H)
    split_rates, merged_rates = [], []
    for r in range(replications):
        schedule = family.realize(r)
        split_rates.append(simulate(s_split, schedule)[1].revenue_rate)
        merged_rates.append(simulate(s_merged, schedule)[1].revenue_rate)
    margins = [a - b for a, b in zip(split_rates, merged_rates)]
    mean_split, _ = _mean_se(split_rates)
    mean_merged, _ = _mean_se(merged_rates)
    _, se = _mean_se(margins)
    fixed = is_unit_size(classes)
    return SplitComparison(
        split_rates, merged_rates, margins, mean_split - mean_merged, se, fixed,
        all(m <= 0.0 for m in margins) if fixed else None,
    )


# -- counterexample hunt ---------------------------------------------------

SIZE_KINDS = ("fixed", "exponential", "two_point", "empirical")


@dataclass(frozen=True)
class HuntSpace:
    """Ranges the hunter samples instances from (all sizes have mean near 1)."""

    total_rate: tuple[float, float] = (2.0, 6.0)
    servers: tuple[int, int] = (2, 4)
    classes: tuple[int, int] = (1, 3)
    load: tuple[float, float] = (0.5, 2.0)          # total arrival rate / total_rate
    reward: tuple[float, float] = (1.0, 10.0)
    cost: tuple[float, float] = (0.1, 2.0)
    toll_fraction: tuple[float, float] = (0.0, 1.0)  # of the largest reward
    size_kinds: tuple[str, ...] = ("exponential", "two_point", "empirical")
    processes: tuple[str, ...] = ("poisson", "fixed")
    expected_arrivals: float = 2000.0
    replications: int = 4

    def __post_init__(self):
        bad = set(self.size_kinds) - set(SIZE_KINDS)
        if bad or not self.size_kinds:
            raise ValueError(f"unknown size kinds {sorted(bad)}")


FIXED_SIZE_SPACE = HuntSpace(size_kinds=("fixed",))


def _sample_size(kind: str, rng: np.random.Generator):
    if kind == "fixed":
        return FixedSize(1.0)
    if kind == "exponential":
        return ExponentialSize(float(rng.uniform(0.5, 1.5)))
    if kind == "two_point":
        a, b = sorted(rng.uniform(0.1, 3.0, size=2))
        return TwoPointSize(float(a), float(b), float(rng.uniform(0.0, 1.0)))
    values = rng.uniform(0.1, 3.0, size=int(rng.integers(2, 6)))
    return EmpiricalSize(tuple(float(v) for v in values))


def sample_instance(space: HuntSpace, seed: int) -> Scenario:
    """Draw one equal-toll split scenario from ``space``; the seed travels along."""
    rng = np.random.default_rng(seed)
    mu_s = float(rng.uniform(*space.total_rate))
    m = int(rng.integers(space.servers[0], space.servers[1] + 1))
    weights = rng.uniform(0.05, 1.0, size=m)
    rates = [float(x) for x in mu_s * weights / weights.sum()]
    rates[-1] = mu_s - math.fsum(rates[:-1])

    n = int(rng.integers(space.classes[0], space.classes[1] + 1))
    lam = float(rng.uniform(*space.load)) * mu_s
    shares = rng.uniform(0.1, 1.0, size=n)
    classes = []
    for i in range(n):
        classes.append(ClassSpec(
            id=i,
            arrival_rate=float(lam * shares[i] / shares.sum()),
            reward=float(rng.uniform(*space.reward)),
            waiting_cost=float(rng.uniform(*space.cost)),
            size_model=_sample_size(str(rng.choice(space.size_kinds)), rng),
            arrival_process=str(rng.choice(space.processes)),
        ))
    toll = float(rng.uniform(*space.toll_fraction)) * max(c.reward for c in classes)
    system = SystemSpec(tuple(ServerSpec(r, toll) for r in rates), mu_s)
    horizon = space.expected_arrivals / lam
    return Scenario(tuple(classes), system, horizon, seed)


@dataclass(frozen=True)
class HuntFinding:
    scenario: Scenario          # carries the instance seed used for schedules
    split_revenue_rate: float
    merged_revenue_rate: float
    margin: float
    std_error: float
    replications: int

    @property
    def seed(self) -> int:
        return self.scenario.seed


def evaluate_instance(scenario: Scenario, replications: int) -> SplitComparison:
    family = ScheduleFamily(scenario.classes, scenario.horizon, scenario.seed)
    return compare_split(scenario.system, scenario.classes, family, replications)


def is_significant(margin: float, std_error: float) -> bool:
    return margin > 3.0 * std_error + 1e-6


def hunt_counterexample(space: HuntSpace, budget: int, seed: int) -> list[HuntFinding]:
    """Search ``space`` for equal-toll splits that out-earn the merged server."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    findings = []
    for i in range(budget):
        scenario = sample_instance(space, derive_seed(seed, i))
        cmp = evaluate_instance(scenario, space.replications)
        if is_significant(cmp.mean_margin, cmp.std_error):
            findings.append(HuntFinding(
                scenario,
                float(np.mean(cmp.split_rates)),
                float(np.mean(cmp.merged_rates)),
                cmp.mean_margin,
                cmp.std_error,
                space.replications,
            ))
    return findings


def replay_finding(finding: HuntFinding) -> HuntFinding:
    cmp = evaluate_instance(finding.scenario, finding.replications)
    return HuntFinding(finding.scenario, float(np.mean(cmp.split_rates)),
                       float(np.mean(cmp.merged_rates)), cmp.mean_margin,
                       cmp.std_error, finding.replications)
