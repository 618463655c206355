"""Two-time operators (states over time) for forward and reverse processes.

All operators live on ``H_out (x) H_in``, the factor order of the Choi
operator. The "tilde" forms conjugate the Choi operator by local square
roots; the plain forms sandwich a local operator between ``sqrt(C_E)`` and
are linear in the input state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import linalg as la
from .channels import QuantumChannel, apply, density_matrix
from .errors import DimensionMismatch, SingularPrior

FORWARD = "forward"
REVERSE = "reverse"
REVERSE_VARIANT = "reverse_variant"


@dataclass(frozen=True)
class StateOverTime:
    matrix: np.ndarray
    dims: tuple
    direction: str
    tilde: bool = False
    channel: QuantumChannel | None = field(default=None, repr=False, compare=False)
    provenance: Mapping[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def marginal_out(self) -> np.ndarray:
        return la.partial_trace(self.matrix, self.dims, keep=0)

    def marginal_in(self) -> np.ndarray:
        return la.partial_trace(self.matrix, self.dims, keep=1)


def _states(channel: QuantumChannel, **named) -> dict:
    out = {}
    for name, m in named.items():
        d = channel.dim_in if name in ("rho", "gamma") else channel.dim_out
        a = density_matrix(m)
        if a.shape[0] != d:
            raise DimensionMismatch(f"{name} has dimension {a.shape[0]}, expected {d}")
        out[name] = a
    return out


def q_forward_tilde(channel: QuantumChannel, rho) -> StateOverTime:
    """``(1 (x) sqrt(rho^T)) C_E (1 (x) sqrt(rho^T))``; marginals ``E(rho)`` and ``rho^T``."""
    s = _states(channel, rho=rho)
    left = np.kron(np.eye(channel.dim_out), la.sqrtm_psd(s["rho"]).T)
    q = la.hermitize(left @ channel.choi @ left)
    return StateOverTime(q, channel.dims, FORWARD, True, channel, s)


def q_forward(channel: QuantumChannel, rho) -> StateOverTime:
    """``sqrt(C_E) (1 (x) rho^T) sqrt(C_E)``."""
    s = _states(channel, rho=rho)
    sc = channel.sqrt_choi
    q = la.hermitize(sc @ np.kron(np.eye(channel.dim_out), s["rho"].T) @ sc)
    return StateOverTime(q, channel.dims, FORWARD, False, channel, s)


def petz_output_operator(channel: QuantumChannel, gamma, tau) -> np.ndarray:
    """``E(gamma)^{-1/2} tau E(gamma)^{-1/2}``, the output-side factor of the Petz reverse."""
    e_gamma = apply(channel, gamma)
    if not la.support_contained(tau, e_gamma):
        raise SingularPrior("supp(tau) is not contained in supp(E(gamma))")
    g = la.inv_sqrtm_psd(e_gamma)
    return la.hermitize(g @ tau @ g)


def variant_output_operator(channel: QuantumChannel, gamma, tau) -> np.ndarray:
    """``[sqrt(tau) (sqrt(tau) E(gamma) sqrt(tau))^{-1/2} sqrt(tau)]^2``.

    Coincides with :func:`petz_output_operator` whenever ``[tau, E(gamma)] = 0``.
    """
    e_gamma = apply(channel, gamma)
    st = la.sqrtm_psd(tau)
    inner = la.hermitize(st @ e_gamma @ st)
    if la.rank(inner) < la.rank(tau):
        raise SingularPrior("sqrt(tau) E(gamma) sqrt(tau) is singular on supp(tau)")
    b = la.hermitize(st @ la.inv_sqrtm_psd(inner) @ st)
    return la.hermitize(b @ b)


def output_operator(channel: QuantumChannel, gamma, tau, variant: bool = False) -> np.ndarray:
    if variant:
        return variant_output_operator(channel, gamma, tau)
    return petz_output_operator(channel, gamma, tau)


def q_reverse(channel: QuantumChannel, gamma, tau, variant: bool = False) -> StateOverTime:
    """``sqrt(C_E) (E(gamma)^{-1/2} tau E(gamma)^{-1/2} (x) gamma^T) sqrt(C_E)``.

    With ``variant=True`` the Petz factor is replaced by the rotated form of
    :func:`variant_output_operator`.
    """
    s = _states(channel, gamma=gamma, tau=tau)
    m = output_operator(channel, s["gamma"], s["tau"], variant)
    sc = channel.sqrt_choi
    q = la.hermitize(sc @ np.kron(m, s["gamma"].T) @ sc)
    return StateOverTime(q, channel.dims, REVERSE_VARIANT if variant else REVERSE, False, channel, s)


def q_reverse_variant(channel: QuantumChannel, gamma, tau) -> StateOverTime:
    return q_reverse(channel, gamma, tau, variant=True)


def q_reverse_tilde(channel: QuantumChannel, gamma, tau) -> StateOverTime:
    """``(sqrt(tau) E(gamma)^{-1/2} (x) sqrt(gamma^T)) C_E (E(gamma)^{-1/2} sqrt(tau) (x) sqrt(gamma^T))``."""
    s = _states(channel, gamma=gamma, tau=tau)
    e_gamma = apply(channel, s["gamma"])
    if not la.support_contained(s["tau"], e_gamma):
        raise SingularPrior("supp(tau) is not contained in supp(E(gamma))")
    right = np.kron(la.inv_sqrtm_psd(e_gamma) @ la.sqrtm_psd(s["tau"]), la.sqrtm_psd(s["gamma"]).T)
    q = la.hermitize(right.conj().T @ channel.choi @ right)
    return StateOverTime(q, channel.dims, REVERSE, True, channel, s)
