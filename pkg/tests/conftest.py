import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lpsmooth.cover import IntervalFamily, build_cover  # noqa: E402
from lpsmooth.signal_core import SampleGrid  # noqa: E402


@pytest.fixture(scope="session")
def family():
    return IntervalFamily(((1.0, 2.0), (3.0, 8.0), (-6.0, -4.0)))


@pytest.fixture(scope="session")
def grid():
    return SampleGrid(64.0, 4096)


@pytest.fixture(scope="session")
def cover(family, grid):
    return build_cover(family, frequency_step=grid.frequency_step)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
