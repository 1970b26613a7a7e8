import sys
from pathlib import Path

import numpy as np
import pytest

from longmem import _backend

sys.path.insert(0, str(Path(__file__).parent))

AVAILABLE = [b for b in _backend.BACKENDS if b != "numba" or _backend.HAVE_NUMBA]


@pytest.fixture(params=AVAILABLE)
def backend(request):
    with _backend.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Collects one PASS/FAIL line per acceptance criterion."""
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
