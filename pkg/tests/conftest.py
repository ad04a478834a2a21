import numpy as np
import pytest

# "PASS criterion n: ..." lines from the acceptance module, echoed at the end
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240519)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
