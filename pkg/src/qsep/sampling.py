"""Random instance generators for tests, the self-test and the acceptance suite."""
from __future__ import annotations

import numpy as np

from .channels import QuantumChannel, choi_from_kraus


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def ginibre(rows: int, cols: int, rng=None) -> np.ndarray:
    rng = _rng(rng)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(d: int, rng=None) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(d, d, rng))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_state(d: int, rng=None, min_eig: float = 0.0, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random state, optionally mixed with ``1/d`` so every eigenvalue >= ``min_eig``."""
    rng = _rng(rng)
    g = ginibre(d, rank or d, rng)
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    if min_eig > 0:
        lam = min(1.0, d * min_eig)
        rho = (1 - lam) * rho + lam * np.eye(d) / d
    return 0.5 * (rho + rho.conj().T)


def random_diagonal_state(d: int, rng=None, min_eig: float = 0.0, basis=None) -> np.ndarray:
    rng = _rng(rng)
    p = rng.dirichlet(np.ones(d))
    p = (1 - d * min_eig) * p + min_eig
    rho = np.diag(p).astype(complex)
    if basis is not None:
        rho = basis @ rho @ basis.conj().T
    return rho


def random_channel(d_in: int, d_out: int | None = None, rng=None, kraus_rank: int | None = None) -> QuantumChannel:
    """Haar-derived random channel: an isometry into ``d_out * kraus_rank`` cut into Kraus blocks.

    With the default ``kraus_rank = d_in * d_out`` the Choi operator is full rank
    almost surely.
    """
    rng = _rng(rng)
    d_out = d_out or d_in
    r = kraus_rank or d_in * d_out
    u = haar_unitary(d_out * r, rng)[:, :d_in]
    kraus = [u[k * d_out:(k + 1) * d_out, :] for k in range(r)]
    return choi_from_kraus(kraus)


def random_povm(d: int, m: int, rng=None) -> list:
    """``m`` full-rank effects ``S^{-1/2} G_i G_i^dagger S^{-1/2}``."""
    rng = _rng(rng)
    gs = [ginibre(d, d, rng) for _ in range(m)]
    ps = [g @ g.conj().T for g in gs]
    s = sum(ps)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    return [0.5 * (e + e.conj().T) for e in (s_inv_half @ p @ s_inv_half for p in ps)]


def random_stochastic(d_out: int, d_in: int, rng=None, floor: float = 0.0) -> np.ndarray:
    """Column-stochastic matrix with entries at least ``floor``."""
    rng = _rng(rng)
    cols = rng.dirichlet(np.ones(d_out), size=d_in).T
    return (1 - d_out * floor) * cols + floor


def random_probability(d: int, rng=None, floor: float = 0.0) -> np.ndarray:
    rng = _rng(rng)
    return (1 - d * floor) * rng.dirichlet(np.ones(d)) + floor
