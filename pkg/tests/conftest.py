import numpy as np
import pytest
from hypothesis import settings

from granup.params import MaterialParams

# first calls include kernel compilation
settings.register_profile("granup", deadline=None, max_examples=100)
settings.load_profile("granup")

# criterion number -> summary line, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def record(key, passed, text):
    ACCEPTANCE_LINES[key] = f"[{'PASS' if passed else 'FAIL'}] {key}: {text}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(str(k).split()[0].rstrip("abc")), str(k))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def params():
    return MaterialParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
