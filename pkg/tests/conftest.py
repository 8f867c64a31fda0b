import numpy as np
import pytest
from hypothesis import settings

from nbscore import ThresholdGrid, validate_dataset

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

TENTHS = [i / 10 for i in range(1, 10)]


@pytest.fixture
def tenths():
    return ThresholdGrid(TENTHS)


@pytest.fixture
def half():
    return ThresholdGrid([0.5])


@pytest.fixture
def four():
    """The four-sample running example: preds, labels."""
    return np.array([0.9, 0.8, 0.3, 0.1]), np.array([1, 0, 1, 0])


@pytest.fixture
def tiny_dataset():
    return validate_dataset([[1], [2], [3], [4]], [0, 0, 1, 1])


def random_instance(rng, n_max=30, p_max=3, lo=-2, hi=2):
    n = int(rng.integers(4, n_max + 1))
    p = int(rng.integers(1, p_max + 1))
    x = rng.integers(0, 3, size=(n, p))
    y = rng.integers(0, 2, size=n)
    y[0], y[1] = 0, 1
    bounds = []
    for _ in range(p):
        a, b = sorted(rng.integers(lo, hi + 1, size=2))
        bounds.append((int(a), int(b)))
    if all(a == b for a, b in bounds):
        bounds[0] = (lo, hi)
    return validate_dataset(x, y), tuple(bounds)


# acceptance results, printed once at the end of the run
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
