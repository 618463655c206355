"""Bayesian reverse processes built from the Petz transpose map.

For a forward channel ``E`` and prior ``gamma`` the reverse channel is

    R(tau) = sqrt(gamma) E^dagger[E(gamma)^{-1/2} tau E(gamma)^{-1/2}] sqrt(gamma).

Priors are never regularized: rank-deficient ``gamma`` or ``E(gamma)`` is
rejected where invertibility is needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .channels import QuantumChannel, adjoint_apply, apply, choi_from_action, density_matrix
from .errors import DimensionMismatch, SingularPrior


def _require_full_rank(m: np.ndarray, what: str) -> None:
    if la.rank(m) < m.shape[0]:
        raise SingularPrior(f"{what} is not full rank")


def petz_apply(channel: QuantumChannel, gamma, tau) -> np.ndarray:
    """Apply the Petz transpose map of ``channel`` with prior ``gamma`` to ``tau``.

    Raises
    ------
    SingularPrior
        If the support of ``tau`` is not inside the support of ``E(gamma)``.
    """
    gamma = density_matrix(gamma)
    tau = la.check_hermitian(tau)
    if gamma.shape[0] != channel.dim_in or tau.shape[0] != channel.dim_out:
        raise DimensionMismatch("gamma/tau dimensions do not match the channel")
    e_gamma = apply(channel, gamma)
    if not la.support_contained(tau, e_gamma):
        raise SingularPrior("supp(tau) is not contained in supp(E(gamma))")
    g = la.inv_sqrtm_psd(e_gamma)
    sg = la.sqrtm_psd(gamma)
    return la.hermitize(sg @ adjoint_apply(channel, g @ tau @ g) @ sg)


@dataclass(frozen=True)
class ReverseChannel:
    """Petz reverse of ``base`` with respect to ``prior``; ``channel`` maps H_out -> H_in."""

    base: QuantumChannel
    prior: np.ndarray
    channel: QuantumChannel

    @property
    def choi_reverse(self) -> np.ndarray:
        return self.channel.choi

    def __call__(self, tau) -> np.ndarray:
        return apply(self.channel, tau)


def petz_reverse_channel(channel: QuantumChannel, gamma) -> ReverseChannel:
    gamma = density_matrix(gamma)
    _require_full_rank(gamma, "prior gamma")
    e_gamma = apply(channel, gamma)
    _require_full_rank(e_gamma, "E(gamma)")
    g = la.inv_sqrtm_psd(e_gamma)
    sg = la.sqrtm_psd(gamma)

    def action(x):
        return sg @ adjoint_apply(channel, g @ x @ g) @ sg

    rev = choi_from_action(action, channel.dim_out, channel.dim_in)
    return ReverseChannel(channel, gamma, rev)


def reverse_choi_relation(channel: QuantumChannel, gamma) -> np.ndarray:
    """``(E(gamma)^{-1/2} (x) sqrt(gamma^T)) C_E (E(gamma)^{-1/2} (x) sqrt(gamma^T))``.

    Equals the transposed Choi operator of the Petz reverse channel once its
    factors are reordered to ``H_out (x) H_in``; see :func:`reordered_reverse_choi`.
    """
    gamma = density_matrix(gamma)
    g = la.inv_sqrtm_psd(apply(channel, gamma))
    left = np.kron(g, la.sqrtm_psd(gamma).T)
    return la.hermitize(left @ channel.choi @ left)


def reordered_reverse_choi(rev: ReverseChannel) -> np.ndarray:
    """``C_R^T`` with its tensor factors swapped onto ``H_out (x) H_in``."""
    d_in, d_out = rev.base.dim_in, rev.base.dim_out
    s = la.swap_operator(d_in, d_out)
    return s @ rev.choi_reverse.T @ s.T


def petz_stinespring(channel: QuantumChannel, gamma) -> np.ndarray:
    """Isometry ``V: H_out -> H_env (x) H_in`` dilating the Petz reverse channel.

    ``V = (sqrt(C_E) (x) sqrt(gamma)) (E(gamma)^{-1/2} (x) |Phi+>_{A'A})`` with
    ``H_env = H_out' (x) H_in'``. Tracing out the environment gives the
    reverse channel; tracing out ``H_in`` gives the reverse state over time.
    """
    gamma = density_matrix(gamma)
    _require_full_rank(apply(channel, gamma), "E(gamma)")
    d_o, d_i = channel.dim_out, channel.dim_in
    g = la.inv_sqrtm_psd(apply(channel, gamma))
    sg = la.sqrtm_psd(gamma)
    sc = channel.sqrt_choi
    v = np.zeros((d_o * d_i * d_i, d_o), dtype=complex)
    eye = np.eye(d_i)
    for b in range(d_o):
        col = np.zeros(d_o * d_i * d_i, dtype=complex)
        for a in range(d_i):
            col += np.kron(sc @ np.kron(g[:, b], eye[:, a]), sg[:, a])
        v[:, b] = col
    return v
