import math
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from splitqueue.arrivals import ScheduleFamily
from splitqueue.coupling import ScopeError
from splitqueue.engine import SimReport
from splitqueue.model import ClassSpec, ExponentialSize, ServerSpec, SystemSpec
from splitqueue.optimize import (
    FIXED_SIZE_SPACE, HuntSpace, compare_split, find_optn, golden_section_max,
    hunt_counterexample, join_threshold, replay_finding, revenue_rate, sample_instance,
)


def report(per_server, horizon, revenue=0.0):
    n = sum(per_server)
    return SimReport(n, 0, tuple(per_server), float(n), float(n), 0.0, horizon,
                     n / horizon, revenue, revenue / horizon)


def test_revenue_rate():
    assert revenue_rate(report([50], 100.0), [2.0]) == 1.0
    assert revenue_rate(report([50], 100.0), [0.0]) == 0.0
    assert revenue_rate(report([10, 0], 10.0), [1.0, 3.0]) == 1.0
    assert revenue_rate(report([4], 8.0, revenue=6.0)) == 0.75


@given(st.integers(0, 1000), st.floats(0.0, 100.0), st.floats(1.0, 1e4))
def test_revenue_rate_linear_in_toll(n, toll, horizon):
    assert revenue_rate(report([n], horizon), [2 * toll]) == pytest.approx(
        2 * revenue_rate(report([n], horizon), [toll]))


@pytest.mark.parametrize("reward, toll, cost, rate, expected", [
    (2.0, 0.0, 1.0, 1.0, 1.0),   # 2 - (V + 1) > 0  <=>  V < 1
    (1.0, 1.0, 3.0, 2.0, -1.0),  # toll eats the reward
    (3.0, 1.0, 2.0, 2.0, 1.0),   # 3 - 1 - 2 (V + 1) / 2 > 0  <=>  V < 1
])
def test_join_threshold(reward, toll, cost, rate, expected):
    assert join_threshold(ClassSpec(0, 1.0, reward, cost), ServerSpec(rate, toll)) == expected


def test_golden_section_finds_parabola_peak():
    pts = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-6)
    best = max(pts, key=lambda p: p[1])[0]
    assert best == pytest.approx(0.3, abs=1e-6)


SINGLE = (ClassSpec(0, 2.0, 4.0, 1.0),)


def test_find_optn_zero_grid():
    res = find_optn(1.0, SINGLE, ScheduleFamily(SINGLE, 100.0, 1), [0.0], 2)
    assert res.best_toll == 0.0 and res.best_revenue_rate == 0.0


def test_toll_above_reward_earns_nothing():
    res = find_optn(1.0, SINGLE, ScheduleFamily(SINGLE, 100.0, 1), [4.0, 5.0, 6.0], 2)
    assert all(rate == 0.0 for _, rate, _ in res.curve)


def test_find_optn_contract():
    fam = ScheduleFamily(SINGLE, 500.0, 5)
    grid = [0.5 * k for k in range(9)]
    res = find_optn(1.0, SINGLE, fam, grid, 3)
    assert res.best_revenue_rate == max(r for _, r, _ in res.curve)
    grid_best = max(r for t, r, _ in res.curve if t in grid)
    assert res.best_revenue_rate >= grid_best
    assert len(res.curve) > len(grid)  # refinement points are kept
    assert find_optn(1.0, SINGLE, fam, grid, 3) == res
    with pytest.raises(ValueError):
        find_optn(1.0, SINGLE, fam, [], 3)
    with pytest.raises(ValueError):
        find_optn(1.0, SINGLE, fam, [1.0, 0.5], 3)


def test_compare_split_fixed_size_never_favours_split():
    classes = (ClassSpec(0, 3.0, 5.0, 1.0), ClassSpec(1, 1.0, 8.0, 0.5, arrival_process="fixed"))
    split = SystemSpec.split([1.0, 2.5, 0.5], 2.0)
    cmp = compare_split(split, classes, ScheduleFamily(classes, 300.0, 8), 4)
    assert cmp.fixed_size and cmp.merged_dominates
    assert all(m <= 0.0 for m in cmp.margins)


def test_compare_split_single_server_has_zero_margins():
    split = SystemSpec.split([2.0], 1.0)
    cmp = compare_split(split, SINGLE, ScheduleFamily(SINGLE, 200.0, 2), 3)
    assert cmp.margins == [0.0, 0.0, 0.0]


def test_compare_split_variable_size_has_no_verdict():
    classes = (ClassSpec(0, 2.0, 5.0, 1.0, ExponentialSize(1.0)),)
    cmp = compare_split(SystemSpec.split([1.0, 1.0], 1.0), classes,
                        ScheduleFamily(classes, 200.0, 2), 3)
    assert cmp.merged_dominates is None
    assert len(cmp.margins) == 3


def test_compare_split_requires_equal_tolls():
    with pytest.raises(ScopeError):
        compare_split(SystemSpec((ServerSpec(1, 1), ServerSpec(1, 2)), 2), SINGLE,
                      ScheduleFamily(SINGLE, 10.0, 0), 1)


def test_sample_instance_is_valid_and_seeded():
    from splitqueue.model import validate, is_equal_toll
    space = HuntSpace()
    for seed in range(30):
        scen = sample_instance(space, seed)
        assert validate(scen).ok
        assert is_equal_toll(scen.system)
        assert scen == sample_instance(space, seed)


def test_hunt_fixed_size_space_is_empty():
    space = replace(FIXED_SIZE_SPACE, expected_arrivals=500.0)
    assert hunt_counterexample(space, 25, seed=1) == []


def test_hunt_budget_must_be_positive():
    with pytest.raises(ValueError):
        hunt_counterexample(HuntSpace(), 0, seed=1)


def test_hunt_findings_replay_exactly():
    space = replace(HuntSpace(), expected_arrivals=500.0)
    findings = hunt_counterexample(space, 30, seed=3)
    assert findings == hunt_counterexample(space, 30, seed=3)
    for f in findings:
        assert f.margin > 3 * f.std_error + 1e-6
        assert replay_finding(f) == f
        assert not math.isnan(f.margin)
