import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_SESSION_START = time.time()
ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_complex(gen, shape):
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (float(str(k).rstrip("b")), str(k))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
    elapsed = time.time() - _SESSION_START
    terminalreporter.write_line(f"full session wall time: {elapsed:.1f} s (budget 1800 s)")
