import numpy as np
import pytest

from hddelta.estimators import Dataset


def random_spd(rng, p, cond=50.0):
    Q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    eig = np.exp(rng.uniform(0, np.log(cond), p))
    S = (Q * eig) @ Q.T
    return (S + S.T) / 2


def orthonormal_design(rng, n, p):
    """X with X'X/n = I exactly (up to rounding)."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return np.sqrt(n) * Q


def soft_threshold_oracle(z, t):
    # scalar, branch-by-branch; deliberately not vectorised
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def normal_equations(X, y):
    return np.linalg.solve(X.T @ X, X.T @ y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_data(rng):
    n, p = 80, 6
    X = rng.standard_normal((n, p))
    beta = np.array([1.5, -2.0, 0, 0, 0.5, 0])
    return Dataset(X, X @ beta + 0.3 * rng.standard_normal(n), beta)


# ---- acceptance reporting -------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
