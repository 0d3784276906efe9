import pytest

from splitqueue import ClassSpec, Scenario, ServerSpec, SystemSpec
from splitqueue.engine import Arrival, Schedule

_ACCEPTANCE = []


def record_criterion(number, name, passed, detail=""):
    _ACCEPTANCE.append((number, name, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {name} {detail}".rstrip())


def unit_schedule(times, class_id=0):
    return Schedule(tuple(Arrival(float(t), class_id, 1.0) for t in times))


def single_server(rate=1.0, toll=0.0, reward=2.0, cost=1.0, horizon=10.0):
    cls = ClassSpec(0, 1.0, reward, cost)
    return Scenario((cls,), SystemSpec((ServerSpec(rate, toll),), rate), horizon)


@pytest.fixture
def two_unit_servers():
    cls = ClassSpec(0, 1.0, 2.0, 1.0)
    return (cls,), SystemSpec.split([1.0, 1.0], 0.0)
