import numpy as np
import pytest

from gmmcramer.gmm1d import Gmm1
from gmmcramer.gmm_nd import GmmN


def random_gmm1(rng, max_n=5, delta_prob=0.2, mu=5.0, smax=3.0):
    n = int(rng.integers(1, max_n + 1))
    s = rng.uniform(0, smax, n)
    s[rng.random(n) < delta_prob] = 0.0
    return Gmm1(rng.dirichlet(np.ones(n)), rng.uniform(-mu, mu, n), s)


def random_gmmn(rng, n=3, m=2, point_mass=False):
    scales = rng.normal(size=(n, m, m)) * 0.5 + np.eye(m)
    if point_mass:
        scales[0] = 0.0
    return GmmN(rng.dirichlet(np.ones(n)), rng.normal(size=(n, m)) * 2, scales)


def rel_err(a, b):
    a, b = np.ravel(a), np.ravel(b)
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
