"""Multi-server toll queues with balking customers: simulation, coupling checks
of split versus merged servers, and revenue search."""

from .model import (
    ClassSpec, EmpiricalSize, ExponentialSize, FixedSize, Scenario, ServerSpec,
    SystemSpec, TwoPointSize, ValidationResult, is_equal_toll, validate,
)
from .engine import Arrival, Schedule, ServerState, SimReport, TraceEvent, simulate
from .arrivals import ScheduleFamily, gen_deterministic, gen_renewal, realize_sizes, superpose
from .coupling import CouplingReport, merge, verify_lemma1, verify_theorem1
from .optimize import compare_split, find_optn, hunt_counterexample, join_threshold, revenue_rate

__version__ = "0.1.0"
