import numpy as np
import pytest

from pinchopt import AlgoConfig, QosTargets, SystemParams


@pytest.fixture
def params():
    """Reference setting: 28 GHz, n_eff 1.4, h 3 m, D 10 m, N 3, 30/-90 dBm."""
    return SystemParams()


@pytest.fixture
def qos():
    return QosTargets(0.5, 0.5)


@pytest.fixture
def algo_cfg():
    return AlgoConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240115)
