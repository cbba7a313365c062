from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from locsym import fixtures as F
from locsym.chain import Chain

settings.register_profile(
    "locsym", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("locsym")

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def generic():
    return F.generic()


@pytest.fixture
def paired():
    return F.paired()


@pytest.fixture
def mirror():
    return F.mirror()


@pytest.fixture
def embedded():
    return F.embedded()


@pytest.fixture
def config_dir():
    return CONFIG_DIR


def random_chain(rng, n, eps_max=1.0, spread=5.0):
    return Chain(rng.uniform(-spread, spread, n), rng.uniform(0.05, eps_max, n - 1))


@pytest.fixture
def make_random_chain(rng):
    return lambda n, **kw: random_chain(rng, n, **kw)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(label, ok, detail):
        line = f"ACCEPTANCE {label}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(line)
        request.config.stash[ACCEPTANCE_LINES].append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: (int(s.split()[1].rstrip("ab:")), s)):
            terminalreporter.write_line(line)
