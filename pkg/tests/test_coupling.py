import pytest
from hypothesis import given, settings, strategies as st

from conftest import unit_schedule
from splitqueue.arrivals import ScheduleFamily
from splitqueue.coupling import (
    ScopeError, admitted_subschedule, merge, verify_lemma1, verify_theorem1,
)
from splitqueue.engine import Arrival, Schedule, TraceEvent, simulate
from splitqueue.model import ClassSpec, Scenario, ServerSpec, SystemSpec, ExponentialSize


def test_merge():
    assert merge([ServerSpec(1, 3), ServerSpec(2, 3)]) == ServerSpec(3, 3)
    assert merge([ServerSpec(1, 0)]) == ServerSpec(1, 0)
    with pytest.raises(ScopeError, match="equal-toll required"):
        merge([ServerSpec(1, 1), ServerSpec(1, 2)])


def _trace(decisions):
    return [TraceEvent(k, (0.0,), (1.0,), (1.0,), d) for k, d in enumerate(decisions)]


def test_admitted_subschedule():
    sched = unit_schedule([1.0, 2.0, 3.0])
    assert len(admitted_subschedule(_trace([None] * 3), sched)) == 0
    assert admitted_subschedule(_trace([0, 1, 0]), sched) == sched
    assert admitted_subschedule(_trace([0, None, 1]), sched).times == [1.0, 3.0]
    with pytest.raises(ValueError):
        admitted_subschedule(_trace([0]), sched)


def test_lemma1_hand_traced_five_arrivals(two_unit_servers):
    # Split (rates 1, 1; join iff own V < 1): s1, s2, s1, s2 join, the
    # arrival at 0.4 sees V = (1.6, 1.7) and balks.  Merged (rate 2; join
    # iff V < 3) sees V = 0, 0.8, 1.6, 2.4, 3.2 and balks only the last.
    classes, split = two_unit_servers
    rep = verify_lemma1(split, merge(split.servers), unit_schedule([0, 0.1, 0.2, 0.3, 0.4]), classes)
    assert rep.admitted_split == 4
    assert rep.admitted_merged_on_Lprime == 4
    assert rep.admitted_merged_on_L == 4
    assert rep.epochs_checked == 4
    assert rep.violations == []
    assert rep.dominance_holds


def test_lemma1_empty_schedule(two_unit_servers):
    classes, split = two_unit_servers
    rep = verify_lemma1(split, merge(split.servers), Schedule(), classes)
    assert rep.epochs_checked == 0 and rep.dominance_holds


def test_lemma1_scope_errors(two_unit_servers):
    classes, split = two_unit_servers
    sized = Schedule((Arrival(0.0, 0, 2.0),))
    with pytest.raises(ScopeError, match="fixed-size"):
        verify_lemma1(split, merge(split.servers), sized, classes)
    unequal = SystemSpec((ServerSpec(1, 1), ServerSpec(1, 2)), 2)
    with pytest.raises(ScopeError, match="equal-toll"):
        verify_lemma1(unequal, ServerSpec(2, 1), unit_schedule([0]), classes)
    with pytest.raises(ValueError):
        verify_lemma1(SystemSpec.split([1, 1, 1], 0), ServerSpec(3, 0), unit_schedule([0]), classes)


def test_theorem1_single_server_is_identity():
    classes = (ClassSpec(0, 2.0, 3.0, 1.0),)
    system = SystemSpec.split([4.0], 1.0)
    sched = ScheduleFamily(classes, 200.0, 1).realize(0)
    rep = verify_theorem1(system, sched, classes)
    assert rep.admitted_split == rep.admitted_merged_on_L
    assert rep.dominance_holds and rep.steps == []


def test_theorem1_two_servers_agrees_with_lemma():
    classes = (ClassSpec(0, 2.5, 3.0, 1.0), ClassSpec(1, 1.0, 6.0, 2.0, arrival_process="fixed"))
    split = SystemSpec.split([0.7, 1.3], 0.5)
    sched = ScheduleFamily(classes, 400.0, 3).realize(0)
    lemma = verify_lemma1(split, merge(split.servers), sched, classes)
    theorem = verify_theorem1(split, sched, classes)
    assert theorem.shared_fields() == lemma.shared_fields()
    assert len(theorem.steps) == 1


def test_theorem1_three_unit_servers_poisson():
    classes = (ClassSpec(0, 3.5, 4.0, 1.0),)
    split = SystemSpec.split([1.0, 1.0, 1.0], 1.0)
    sched = ScheduleFamily(classes, 500.0, 12).realize(0)
    rep = verify_theorem1(split, sched, classes)
    assert len(rep.steps) == 2
    assert all(s.dominance_holds for s in rep.steps)
    assert rep.violations == []
    assert rep.dominance_holds
    assert rep.admitted_merged_on_L >= rep.admitted_split


def test_variable_sizes_are_checked_not_rejected():
    classes = (ClassSpec(0, 2.0, 5.0, 1.0, ExponentialSize(1.0)),)
    split = SystemSpec.split([0.5, 1.5], 0.0)
    sched = ScheduleFamily(classes, 300.0, 4).realize(0)
    rep = verify_lemma1(split, merge(split.servers), sched, classes, allow_variable_sizes=True)
    assert rep.epochs_checked == rep.admitted_split


@st.composite
def fixed_size_instances(draw):
    m = draw(st.integers(2, 5))
    rates = draw(st.lists(st.floats(0.05, 4.0), min_size=m, max_size=m))
    n = draw(st.integers(1, 3))
    classes = tuple(ClassSpec(i, 1.0, draw(st.floats(0.5, 10.0)), draw(st.floats(0.1, 3.0)))
                    for i in range(n))
    toll = draw(st.floats(0.0, max(c.reward for c in classes)))
    gaps = draw(st.lists(st.floats(0.0, 2.0), max_size=80))
    t, arrivals = 0.0, []
    for g in gaps:
        t += g
        arrivals.append(Arrival(t, draw(st.integers(0, n - 1)), 1.0))
    return SystemSpec.split(rates, toll), Schedule(tuple(arrivals)), classes


@settings(max_examples=300, deadline=None)
@given(fixed_size_instances())
def test_dominance_on_random_fixed_size_instances(case):
    split, sched, classes = case
    rep = verify_theorem1(split, sched, classes)
    assert rep.violations == []
    assert rep.dominance_holds
    for step in rep.steps:
        assert step.admitted_merged_on_Lprime == step.epochs_checked
        assert step.admitted_merged_on_L >= step.admitted_split


def brute_force_admitted(rate, toll, classes, sched):
    """Single-server count straight from the join rule R - toll - c (V + 1) / rate > 0."""
    by_id = {c.id: c for c in classes}
    V, last, n = 0.0, 0.0, 0
    for t, cid, _ in sched:
        V = max(V - rate * (t - last), 0.0)
        last = t
        c = by_id[cid]
        if c.reward - toll - c.waiting_cost * (V + 1.0) / rate > 0:
            V += 1.0
            n += 1
    return n


@settings(max_examples=100, deadline=None)
@given(fixed_size_instances())
def test_merged_count_matches_brute_force(case):
    split, sched, classes = case
    rep = verify_theorem1(split, sched, classes)
    toll = split.servers[0].toll
    assert rep.admitted_merged_on_L == brute_force_admitted(split.total_rate, toll, classes, sched)
    _, direct = simulate(Scenario(classes, split, 1.0), sched)
    assert rep.admitted_split == direct.admitted
