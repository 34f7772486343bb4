import numpy as np
import pytest

from ampmask.binary import BinaryParams, build_binary_channel

# frozen reference values (bits), computed at 30 digits outside the package
ONE_MINUS_H01 = 0.531004406410718778746
H03_MINUS_H01 = 0.412295305641411396971
ONE_MINUS_H03 = 0.118709100769307381775
GAUSS_CD = 1.093813501587885665129


def random_joint(rng: np.random.Generator, shape, sparsity: float = 0.0) -> np.ndarray:
    p = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    if sparsity:
        p = np.where(rng.random(shape) < sparsity, 0.0, p)
        if p.sum() == 0:
            p.flat[0] = 1.0
        p = p / p.sum()
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def binary_channel():
    return build_binary_channel(BinaryParams(0.5, 0.1, 0.3))


def random_channel(rng: np.random.Generator, n_s=2, n_x=2, n_y=2, n_z=2, sparsity=0.0):
    from ampmask.channel import StateDMC

    k = random_joint(rng, (n_s, n_x, n_y * n_z), sparsity)
    k = k / k.sum(axis=2, keepdims=True).clip(min=1e-300)
    # rows zeroed out by sparsity fall back to a point mass
    dead = k.sum(axis=2) == 0
    k[dead, 0] = 1.0
    return StateDMC(rng.dirichlet(np.ones(n_s)), k.reshape(n_s, n_x, n_y, n_z))


def random_policy(rng: np.random.Generator, n_s=2, n_u=2, n_x=2):
    from ampmask.channel import Policy

    t = rng.dirichlet(np.ones(n_u * n_x), size=n_s).reshape(n_s, n_u, n_x)
    return Policy(t)
