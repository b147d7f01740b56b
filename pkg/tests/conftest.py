import numpy as np
import pytest

import qpolar as qp


@pytest.fixture(scope="session")
def small_channel_pool():
    """A mixed bag of modest channels for invariant sweeps."""
    pool = []
    for q in (2, 3, 5):
        pool.append(qp.noiseless(q))
        pool.append(qp.useless(q, 3))
        for e in (0.0, 0.25, 0.5, 0.9, 1.0):
            pool.append(qp.erasure_channel(q, e))
        for i in range(20):
            m = 2 + i % 5
            pool.append(qp.random_channel(q, m, seed=1000 * q + i))
    pool.append(qp.subgroup_channel(4, 2))
    pool.append(qp.subgroup_channel(6, 2))
    pool.append(qp.subgroup_channel(6, 3))
    pool.append(qp.subgroup_channel(9, 3))
    return pool


@pytest.fixture
def rng():
    return np.random.default_rng(12321)
