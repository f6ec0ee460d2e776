import numpy as np
import pytest

from swarmtune.tinycnn.data import generate_synthetic_dataset


@pytest.fixture(scope="session")
def small_dataset():
    """4 classes x 10 images of 8x8: fast enough for per-test training."""
    return generate_synthetic_dataset(classes=4, per_class=10, size=(8, 8), seed=3)


@pytest.fixture(scope="session")
def synthetic_dataset():
    return generate_synthetic_dataset(classes=4, per_class=50, size=(32, 32), seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
