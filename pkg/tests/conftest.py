import sys

import pytest

from klbound import DiscreteFinite


@pytest.fixture
def golden_pair():
    """Uniform on {1,2,3,4} against (0.1, 0.2, 0.3, 0.4)."""
    p = DiscreteFinite.uniform((1.0, 2.0, 3.0, 4.0))
    q = DiscreteFinite((1.0, 2.0, 3.0, 4.0), (0.1, 0.2, 0.3, 0.4))
    return p, q


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
