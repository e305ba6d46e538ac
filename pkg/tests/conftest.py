import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(rng, n, lo=0.0, hi=1.0, min_pers=0.01, max_pers=1.0):
    b = rng.uniform(lo, hi, n)
    return np.column_stack([b, b + rng.uniform(min_pers, max_pers, n)])


# acceptance criteria record their verdicts here for the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
