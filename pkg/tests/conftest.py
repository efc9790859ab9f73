import numpy as np
import pytest

from gpbag.datasets import Dataset

# One line per acceptance criterion, printed after the run (see
# tests/test_acceptance.py, which appends to this list).
ACCEPTANCE_REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_regression(n=80, d=3, seed=0, name="reg"):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d))
    y = 2.0 * X[:, 0] - X[:, 1] + 0.05 * r.normal(size=n)
    return Dataset(name=name, features=X, labels=y, task="regression")


def make_classification(n=80, d=3, seed=0, name="clf"):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(float)
    return Dataset(name=name, features=X, labels=y, task="classification")


@pytest.fixture
def regression_dataset():
    return make_regression()


@pytest.fixture
def classification_dataset():
    return make_classification()
