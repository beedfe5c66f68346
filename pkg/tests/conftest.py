import numpy as np
import pytest

from irs_spgm.channel import RicianParams, draw_realization
from irs_spgm.system import SystemConfig

SEED = 20201016


@pytest.fixture
def rng(request):
    # one generator per test, seeded from the test name so failures replay
    seed = SEED + sum(map(ord, request.node.name))
    print(f"rng seed: {seed}")
    return np.random.default_rng(seed)


@pytest.fixture
def default_rician():
    return RicianParams()


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def instance(n_t, n_b, n_r, seed, rician=None, **cfg_kw):
    cfg = SystemConfig(n_t, n_b, n_r, **cfg_kw)
    return cfg, draw_realization(cfg, rician or RicianParams(), seed)
