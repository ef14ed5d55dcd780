import numpy as np
import pytest

from projuniform.samplers import make_generator
from projuniform.spaces import parse_space

JITTER_SEED = 2024
_ACCEPTANCE = []


@pytest.fixture(scope="session")
def c3():
    return parse_space("C3")


@pytest.fixture(scope="session")
def c3_jittered(c3):
    """Jittered generator on CP^2; fitted partitions are cached across tests."""
    return make_generator("jittered", c3, seed=JITTER_SEED)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report():
    """``report(number, title, ok, detail)`` prints and records one acceptance line."""
    def _report(number, title, ok, detail):
        line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'} {title}: {detail}"
        print(line)
        _ACCEPTANCE.append((number, line))
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
