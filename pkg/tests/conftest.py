import numpy as np
import pytest

from qsep import linalg as la
from qsep.channels import apply
from qsep.sampling import random_channel, random_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def full_rank_instance(rng, d, d_out=None, min_eig=0.02):
    """Random full-rank channel together with full-rank rho, gamma, tau."""
    chan = random_channel(d, d_out or d, rng)
    rho = random_state(d, rng, min_eig)
    gamma = random_state(d, rng, min_eig)
    tau = random_state(d_out or d, rng, min_eig)
    return chan, rho, gamma, tau


def commutes(a, b, tol=1e-12):
    return np.max(np.abs(a @ b - b @ a)) < tol


def preimage(chan, target):
    """Operator ``x`` with ``chan(x) = target``; needs an invertible channel."""
    d = chan.dim_in
    basis = [la.unit(i, j, d) for i in range(d) for j in range(d)]
    a = np.array([apply(chan, b).reshape(-1) for b in basis]).T
    return la.hermitize(np.linalg.solve(a, target.reshape(-1)).reshape(d, d))
