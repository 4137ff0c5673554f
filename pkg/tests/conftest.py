import pytest

from ddcsim import kernels
from ddcsim.config import preset
from ddcsim.workload import VmRequest

# lines appended by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernels():
    kernels.warmup()


@pytest.fixture
def toy_table3():
    """Toy cluster loaded with the mid-run availability snapshot."""
    return preset("toy-table3")


@pytest.fixture
def toy_vm():
    return VmRequest(0, 8, 16, 128, 0.0, 10.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
