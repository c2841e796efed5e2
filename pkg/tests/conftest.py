import zlib

import numpy as np
import pytest
from hypothesis import settings

from secureas.model import ChannelSet, SystemConfig, power
from secureas.sim import desk_profile, run_scenario

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def make_instance(rng, M=6, N=3, K=2, J=2, p=None, random_params=True):
    """Unit-variance Rayleigh instance; weights and noise drawn when ``random_params``."""
    p = rng.uniform(0.5, 5.0) if p is None else p
    if random_params:
        cfg = SystemConfig(M, N, K, J, p, rng.uniform(0.5, 2.0, K), rng.uniform(0.5, 2.0, K), rng.uniform(0.5, 2.0, J))
    else:
        cfg = SystemConfig(M, N, K, J, p)
    return cfg, ChannelSet(cn(rng, M, K), cn(rng, M, J))


def random_binary(rng, M, N):
    s = np.zeros(M)
    s[rng.choice(M, N, replace=False)] = 1.0
    return s


def random_W(rng, cfg, fill=1.0):
    W = cn(rng, cfg.M, cfg.K)
    return W * np.sqrt(fill * cfg.power_budget / power(W))


@pytest.fixture
def rng(request):
    # a distinct, reproducible stream per test
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))


# desk-scale Monte Carlo runs are shared by the sim and acceptance tests
@pytest.fixture(scope="session")
def desk_power_sweep():
    return run_scenario(desk_profile(sweep="power", sweep_values=(0.0, 5.0, 10.0)))


@pytest.fixture(scope="session")
def desk_rf_sweep():
    return run_scenario(desk_profile(sweep="rf", sweep_values=(2, 4, 6), schemes=("pdd", "so")))
