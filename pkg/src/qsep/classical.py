"""Classical stochastic entropy production with Bayesian reverse processes.

Stochastic matrices are column-stochastic: ``phi[o, i] = phi(s_o | s_i)``.
Cells with zero forward probability carry no entropy value (``nan``) and
are dropped from averages (``0 log 0 = 0``).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .channels import Povm, QuantumChannel, density_matrix
from .errors import DimensionMismatch, InvalidParameter, SingularPrior, SupportMismatch


def _prob(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim != 1 or np.any(a < -1e-15) or abs(a.sum() - 1.0) > 1e-12:
        raise InvalidParameter(f"{name} is not a probability vector")
    return np.clip(a, 0.0, None)


@dataclass(frozen=True)
class ClassicalProcess:
    """Initial distribution ``p``, channel ``phi``, prior ``pi`` and reverse start ``q``.

    ``pi`` and ``q`` may be left as ``None`` (for instance by
    :func:`tpm_process`) and filled in later with :meth:`with_reference`.
    """

    p: np.ndarray
    phi: np.ndarray
    pi: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 2 or np.any(phi < -1e-15):
            raise InvalidParameter("phi must be a non-negative matrix")
        if np.max(np.abs(phi.sum(axis=0) - 1.0)) > 1e-12:
            raise InvalidParameter("phi must be column-stochastic")
        object.__setattr__(self, "phi", np.clip(phi, 0.0, None))
        object.__setattr__(self, "p", _prob(self.p, "p"))
        if self.p.size != phi.shape[1]:
            raise DimensionMismatch("p does not match the input size of phi")
        if self.pi is not None:
            object.__setattr__(self, "pi", _prob(self.pi, "pi"))
            if self.pi.size != phi.shape[1]:
                raise DimensionMismatch("pi does not match the input size of phi")
        if self.q is not None:
            object.__setattr__(self, "q", _prob(self.q, "q"))
            if self.q.size != phi.shape[0]:
                raise DimensionMismatch("q does not match the output size of phi")

    @property
    def n_in(self) -> int:
        return self.phi.shape[1]

    @property
    def n_out(self) -> int:
        return self.phi.shape[0]

    def with_reference(self, pi=None, q=None) -> "ClassicalProcess":
        return replace(
            self,
            pi=self.pi if pi is None else pi,
            q=self.q if q is None else q,
        )

    def _need(self) -> None:
        if self.pi is None or self.q is None:
            raise InvalidParameter("process needs both a prior pi and a reverse input q")


def kl(p, q) -> float:
    p, q = np.asarray(p, float), np.asarray(q, float)
    m = p > 0
    if np.any(q[m] <= 0):
        raise SupportMismatch("KL divergence: supp(p) not contained in supp(q)")
    return float(np.sum(p[m] * np.log(p[m] / q[m])))


def classical_reverse(proc: ClassicalProcess) -> np.ndarray:
    """Bayesian retrodiction ``phihat[i, o] = phi[o, i] pi[i] / (phi pi)[o]``.

    Outputs that the prior never reaches, and that ``q`` does not visit, get
    a uniform column so that the result stays column-stochastic.
    """
    if proc.pi is None:
        raise InvalidParameter("classical_reverse needs a prior pi")
    lam = proc.phi @ proc.pi
    if proc.q is not None and np.any((lam <= 0) & (proc.q > 0)):
        raise SingularPrior("(phi pi)(o) = 0 on the support of q")
    out = np.full((proc.n_in, proc.n_out), 1.0 / proc.n_in)
    ok = lam > 0
    out[:, ok] = (proc.phi[ok, :] * proc.pi[None, :]).T / lam[ok][None, :]
    return out


def trajectory_probabilities(proc: ClassicalProcess):
    """``(P_F[i, o], P_R[o, i])`` for every trajectory ``i -> o``."""
    proc._need()
    p_f = proc.p[:, None] * proc.phi.T
    p_r = proc.q[:, None] * classical_reverse(proc).T
    return p_f, p_r


def classical_sigma(proc: ClassicalProcess) -> np.ndarray:
    """``sigma[i, o] = log(P_F / P_R) = log(p_i / pi_i) - log(q_o / (phi pi)_o)``.

    Cells with ``P_F = 0`` hold ``nan``.
    """
    proc._need()
    p_f = proc.p[:, None] * proc.phi.T
    lam = proc.phi @ proc.pi
    live = p_f > 0
    ii, oo = np.nonzero(live)
    if np.any(proc.pi[ii] <= 0) or np.any(proc.q[oo] <= 0) or np.any(lam[oo] <= 0):
        raise SupportMismatch("entropy production is infinite on a trajectory with P_F > 0")
    sig = np.full(p_f.shape, np.nan)
    sig[ii, oo] = np.log(proc.p[ii] / proc.pi[ii]) - np.log(proc.q[oo] / lam[oo])
    return sig


class ClassicalAverage(NamedTuple):
    avg: float
    decomposition: tuple  # (D(p||pi), D(phi p||phi pi), D(phi p||q))


def classical_average(proc: ClassicalProcess) -> ClassicalAverage:
    proc._need()
    out_p, out_pi = proc.phi @ proc.p, proc.phi @ proc.pi
    d_in, d_out1, d_out2 = kl(proc.p, proc.pi), kl(out_p, out_pi), kl(out_p, proc.q)
    return ClassicalAverage(d_in - d_out1 + d_out2, (d_in, d_out1, d_out2))


def trajectory_average(proc: ClassicalProcess) -> float:
    """``sum P_F sigma`` over trajectories, the independent route to the average."""
    p_f, _ = trajectory_probabilities(proc)
    sig = classical_sigma(proc)
    m = p_f > 0
    return float(np.sum(p_f[m] * sig[m]))


def tpm_process(label_dist, states: Sequence, povm) -> ClassicalProcess:
    """Two-point-measurement process with ``phi(j | i) = Tr[rho_i Pi_j]``; ``pi`` and ``q`` unset."""
    if not isinstance(povm, Povm):
        povm = Povm(tuple(povm))
    states = [density_matrix(s) for s in states]
    if len(states) != len(label_dist):
        raise DimensionMismatch("one state per label is required")
    if any(s.shape[0] != povm.dim for s in states):
        raise DimensionMismatch("state and POVM dimensions differ")
    phi = np.array([povm.probabilities(s) for s in states]).T
    return ClassicalProcess(label_dist, phi)


def measure_prepare_channel(phi) -> QuantumChannel:
    """``E(X) = sum_ij phi(j | i) <i|X|i> |j><j|``; Choi ``sum phi(j|i) |j><j| (x) |i><i|``."""
    phi = np.asarray(phi, dtype=float)
    d_out, d_in = phi.shape
    return QuantumChannel(np.diag(phi.reshape(-1)).astype(complex), d_in, d_out)


def embed_as_quantum(proc: ClassicalProcess):
    """``(channel, rho, gamma, tau)`` with all states diagonal in the computational basis."""
    proc._need()
    diag = lambda v: np.diag(v).astype(complex)
    return measure_prepare_channel(proc.phi), diag(proc.p), diag(proc.pi), diag(proc.q)
