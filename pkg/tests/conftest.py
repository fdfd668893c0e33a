import numpy as np
import pytest
from hypothesis import settings, strategies as st

from szego_frames.hardy_core import HardyFunction

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)


def polynomials(min_size=1, max_size=24):
    return st.lists(complexes, min_size=min_size, max_size=max_size).map(HardyFunction)


def nonzero_polynomials(max_size=24):
    return polynomials(max_size=max_size).filter(lambda f: not f.is_zero)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_poly(rng, degree):
    return HardyFunction(rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1))
