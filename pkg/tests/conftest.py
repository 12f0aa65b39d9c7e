import pytest

from lorawan_adr import PowerPolicy, eu868_suburban, plan_radius_first


@pytest.fixture(scope="session")
def inputs():
    return eu868_suburban()


@pytest.fixture(scope="session")
def channel(inputs):
    return inputs.channel


@pytest.fixture(scope="session")
def profiles(inputs):
    return inputs.profiles


@pytest.fixture(scope="session")
def reference_plan(inputs):
    """The 1200 m, 1% outage scenario."""
    return plan_radius_first(1200.0, 0.01, inputs)


@pytest.fixture(scope="session")
def allocated():
    return PowerPolicy.allocated()


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def report():
    """Collects one verdict line per acceptance criterion for the terminal summary."""

    def record(criterion, passed, detail):
        _ACCEPTANCE.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        print(_ACCEPTANCE[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
