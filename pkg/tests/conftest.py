import pytest

from gridsim import grid, sequence
from gridsim.daily import bundled_profiles
from gridsim.pv import load_pv_params

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def net():
    return grid.load_network(grid.bundled_network_path())


@pytest.fixture(scope="session")
def seq(net):
    return sequence.reduce_all(net.configs)


@pytest.fixture(scope="session")
def ybus(net, seq):
    return sequence.assemble_ybus(net, seq)


@pytest.fixture(scope="session")
def params():
    return load_pv_params()


@pytest.fixture(scope="session")
def profiles():
    return bundled_profiles()


@pytest.fixture
def acceptance_report():
    def report(criterion, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
