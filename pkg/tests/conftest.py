"""Shared fixtures: small integration configs and channel factories."""
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from models import ChannelParams, PathLossParams, QmcConfig, QuadConfig, SimConfig  # noqa: E402


@pytest.fixture
def qmc():
    return QmcConfig(point_count=2**13, scramble_seed=1, batch_count=8)


@pytest.fixture
def big_qmc():
    return QmcConfig(point_count=2**16, scramble_seed=1, batch_count=8)


@pytest.fixture
def quad():
    return QuadConfig()


@pytest.fixture
def sim_cfg():
    return SimConfig(trials=20_000, seed=7)


@pytest.fixture
def channel():
    def make(beta: float = 4.0, W: float = 0.0, gamma: float = 1.0, a: float = 1.0):
        return ChannelParams(PathLossParams(beta), W, gamma, a)
    return make
