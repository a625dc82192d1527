import numpy as np
import pytest

from jcam.config import SystemConfig
from jcam.grouping import ModeAssignment, build_groups
from jcam.scenario import make_drop


@pytest.fixture
def small_config():
    return SystemConfig(M=8, N=6, K=4, U=2, seed=1)


@pytest.fixture
def small_drop(small_config):
    return make_drop(small_config, small_config.seed)


@pytest.fixture
def half_split(small_drop, small_config):
    _, ls = small_drop
    a = ModeAssignment.from_monitoring(small_config.M, [1, 3, 4, 6])
    return a, build_groups(ls, a, small_config)


def random_assignment(rng, M):
    a = rng.integers(0, 2, size=M).astype(np.int8)
    return ModeAssignment(a)


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one status line per acceptance criterion for the terminal summary."""
    lines = getattr(request.config, "_acceptance_lines", None)
    if lines is None:
        lines = request.config._acceptance_lines = []
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
