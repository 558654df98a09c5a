"""
Shared fixtures for the bdslab test suite.
"""

import numpy as np
import pytest
import structlog

from bdslab.schemas import Scenario, SimConfig
from bdslab.services.model import optimal_tau

# Case 1: Foundry USA attacks AntPool; Case 2: Poolin attacks Foundry USA
CASE1 = (0.18, 0.15)
CASE2 = (0.12, 0.18)

# Monte Carlo tolerance in standard errors. Standard errors come from 16
# replicas, so the z-score follows a t distribution with 15 degrees of freedom.
Z_TOL = 4.5


def scenario(alpha: float, beta: float, participation: float = 0.0) -> Scenario:
    return Scenario(
        alpha=alpha,
        beta=beta,
        tau=optimal_tau(alpha, beta),
        participation=participation,
    )


@pytest.fixture(autouse=True)
def _restore_structlog_config():
    """Undo CLI logging setup so loggers never hold a closed capsys stream."""
    saved = structlog.get_config()
    yield
    structlog.configure(**saved)


@pytest.fixture
def case1() -> Scenario:
    return scenario(*CASE1, participation=0.2)


@pytest.fixture
def case1_full() -> Scenario:
    return scenario(*CASE1, participation=1.0)


@pytest.fixture
def case2() -> Scenario:
    return scenario(*CASE2, participation=1.0)


@pytest.fixture
def quick_sim() -> SimConfig:
    return SimConfig(rounds=20_000, seed=7, replicas=16)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def random_scenarios(rng: np.random.Generator, count: int, participation: bool = True):
    """Random valid scenarios with optimal tau; alpha, beta in (0.01, 0.49)."""
    for _ in range(count):
        alpha, beta = rng.uniform(0.01, 0.49, size=2)
        r = float(rng.uniform(1e-3, 1.0)) if participation else 0.0
        yield scenario(float(alpha), float(beta), participation=r)
