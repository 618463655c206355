"""Entropy production: divergences, the entropy-production operator and its statistics.

All entropies are in nats. Support violations raise :class:`SupportMismatch`;
no function returns ``inf``.

The operator is ``Sigma = log(sqrt(Q_F) Q_R^{-1} sqrt(Q_F))``. It is built from
the singular value decomposition ``sqrt(Q_F) Q_R^{-1/2} = U S V^dagger``:
the columns of ``U`` are the forward eigenvectors ``|f_k>``, the columns of
``V`` the reverse eigenvectors ``|r_k>``, and ``Sigma_k = 2 log s_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np
from scipy.linalg import polar

from . import linalg as la
from .channels import (
    Povm,
    QuantumChannel,
    apply,
    compose,
    density_matrix,
    measurement_channel,
)
from .errors import NotFullRank, PreconditionViolation, SingularPrior, SupportMismatch
from .states import (
    StateOverTime,
    output_operator,
    q_forward,
    q_forward_tilde,
    q_reverse,
)

DEGENERACY_BIN = 1e-9


def _psd(m) -> np.ndarray:
    a = la.check_hermitian(m)
    w = np.linalg.eigvalsh(a)
    if w.size and w[0] < -max(1e-12, la.SUPPORT_CUTOFF * abs(w[-1])):
        raise la.NegativeSpectrum(f"operator has negative eigenvalue {w[0]:.3e}")
    return a


def _require_support(rho, sigma, what: str = "rho") -> None:
    if not la.support_contained(rho, sigma):
        raise SupportMismatch(f"supp({what}) is not contained in the support of the reference")


# ---------------------------------------------------------------------------
# divergences
# ---------------------------------------------------------------------------

def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(density_matrix(rho))
    w = w[w > la.SUPPORT_CUTOFF * w[-1]]
    return float(-np.sum(w * np.log(w)))


def umegaki(rho, sigma) -> float:
    """Umegaki relative entropy ``Tr[rho (log rho - log sigma)]``."""
    rho, sigma = _psd(rho), _psd(sigma)
    _require_support(rho, sigma)
    return float(np.trace(rho @ (la.logm_psd(rho) - la.logm_psd(sigma))).real)


def bs_divergence(rho, sigma) -> float:
    """Belavkin-Staszewski relative entropy ``Tr[rho log(sqrt(rho) sigma^{-1} sqrt(rho))]``.

    Computed with a dense matrix logarithm; inverses and logarithms act on supports.
    """
    rho, sigma = _psd(rho), _psd(sigma)
    _require_support(rho, sigma)
    s = la.sqrtm_psd(rho)
    x = la.hermitize(s @ la.inv_psd(sigma) @ s)
    return float(np.trace(rho @ la.logm_psd(x)).real)


def avg_def1(channel: QuantumChannel, rho, gamma, tau) -> float:
    """``D(rho||gamma) - D(E(rho)||E(gamma)) + D(E(rho)||tau)`` with Umegaki ``D``."""
    rho, gamma, tau = density_matrix(rho), density_matrix(gamma), density_matrix(tau)
    e_rho, e_gamma = apply(channel, rho), apply(channel, gamma)
    return umegaki(rho, gamma) - umegaki(e_rho, e_gamma) + umegaki(e_rho, tau)


# ---------------------------------------------------------------------------
# the operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyOperator:
    """Entropy-production operator together with its singular value data.

    ``eigenvalues`` are ascending. ``forward_eigvecs[:, k]`` and
    ``reverse_eigvecs[:, k]`` belong to ``eigenvalues[k]``; only the support
    of ``Q_F`` is spanned.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    forward_eigvecs: np.ndarray
    reverse_eigvecs: np.ndarray
    singular_values: np.ndarray
    dims: tuple = ()

    def exp(self, scale: float = 1.0) -> np.ndarray:
        """``exp(scale * Sigma)`` restricted to the support of ``Q_F``."""
        f = self.forward_eigvecs
        return (f * np.exp(scale * self.eigenvalues)) @ f.conj().T

    def apply_fn(self, fn) -> np.ndarray:
        f = self.forward_eigvecs
        return (f * fn(self.eigenvalues)) @ f.conj().T


def _as_matrix(q) -> np.ndarray:
    return q.matrix if isinstance(q, StateOverTime) else la.check_hermitian(q)


def sigma_operator(qf, qr) -> EntropyOperator:
    """``log{sqrt(Q_F) Q_R^{-1} sqrt(Q_F)}`` on the support of ``Q_F``.

    Raises
    ------
    SupportMismatch
        If ``Q_R`` is not invertible on the support of ``Q_F``.
    """
    a_f, a_r = _psd(_as_matrix(qf)), _psd(_as_matrix(qr))
    if a_f.shape != a_r.shape:
        raise la.DimensionMismatch("Q_F and Q_R have different shapes")
    _require_support(a_f, a_r, "Q_F")
    r = la.rank(a_f)
    a = la.sqrtm_psd(a_f) @ la.inv_sqrtm_psd(a_r)
    u, s, vh = np.linalg.svd(a)
    # numpy returns descending singular values; keep the support of Q_F and sort ascending
    u, s, v = u[:, :r][:, ::-1], s[:r][::-1], vh.conj().T[:, :r][:, ::-1]
    for k in range(r):
        col = u[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-8)
        ph = abs(col[idx[0]]) / col[idx[0]]
        u[:, k] *= ph
        v[:, k] *= ph
    sig = 2.0 * np.log(s)
    mat = la.hermitize((u * sig) @ u.conj().T)
    dims = qf.dims if isinstance(qf, StateOverTime) else ()
    return EntropyOperator(mat, sig, u, v, s, dims)


def _is_unitary_pair(qf, qr) -> bool:
    return (
        isinstance(qf, StateOverTime)
        and isinstance(qr, StateOverTime)
        and qf.channel is not None
        and qf.channel is qr.channel
        and qf.channel.is_unitary
    )


def avg_def2(qf, qr, sigma: EntropyOperator | None = None) -> float:
    """``Tr[Q_F Sigma] = D_BS(Q_F || Q_R)``, summed over ``2 log s_k <f_k|Q_F|f_k>``.

    Unitary channels give ``Q_F = Q_R`` identically, and return 0 without
    touching the rank-one operators.
    """
    if _is_unitary_pair(qf, qr):
        return 0.0
    sigma = sigma or sigma_operator(qf, qr)
    f = sigma.forward_eigvecs
    weights = np.einsum("ik,ij,jk->k", f.conj(), _as_matrix(qf), f).real
    return float(np.dot(weights, sigma.eigenvalues))


def avg_explicit(channel: QuantumChannel, rho, gamma, tau, variant: bool = False) -> float:
    """``D_BS(rho||gamma) - Tr[E(rho) log(E(gamma)^{-1/2} tau E(gamma)^{-1/2})]``.

    Valid for full-rank Choi operators. ``variant=True`` swaps the Petz factor
    for the rotated reverse of :func:`qsep.states.variant_output_operator`.
    """
    if not channel.is_full_rank:
        raise NotFullRank("explicit average requires a full-rank Choi operator")
    rho, gamma, tau = density_matrix(rho), density_matrix(gamma), density_matrix(tau)
    if la.rank(gamma) < gamma.shape[0]:
        raise SingularPrior("prior gamma is not full rank")
    e_gamma = apply(channel, gamma)
    if la.rank(e_gamma) < e_gamma.shape[0]:
        raise SingularPrior("E(gamma) is not full rank")
    m = output_operator(channel, gamma, tau, variant)
    e_rho = apply(channel, rho)
    _require_support(e_rho, m, "E(rho)")
    return bs_divergence(rho, gamma) - float(np.trace(e_rho @ la.logm_psd(m)).real)


# ---------------------------------------------------------------------------
# fluctuation theorems
# ---------------------------------------------------------------------------

def jarzynski(qf, sigma: EntropyOperator) -> float:
    """``Tr[Q_F exp(-Sigma)]``; equals ``Tr[Q_R]`` when the supports coincide."""
    return float(np.trace(_as_matrix(qf) @ sigma.exp(-1.0)).real)


class CrooksRow(NamedTuple):
    sigma: float
    p_f: float
    p_r: float
    ratio_error: float


@dataclass(frozen=True)
class FluctuationReport:
    jarzynski_value: float
    crooks_rows: List[CrooksRow]
    support_ok: bool
    degenerate: bool = False
    average: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "jarzynski": self.jarzynski_value,
            "average": self.average,
            "support_ok": self.support_ok,
            "degenerate": self.degenerate,
            "crooks": [r._asdict() for r in self.crooks_rows],
        }


def crooks(qf, qr, strict: bool = False) -> FluctuationReport:
    """Forward/reverse entropy statistics and the Crooks residuals.

    Each row holds ``P_F(Sigma_k) = <f_k|Q_F|f_k>``, ``P_R(-Sigma_k) = <r_k|Q_R|r_k>``
    and ``|P_R - exp(-Sigma_k) P_F|``. Eigenvalues closer than
    ``DEGENERACY_BIN`` are merged into one row with summed probabilities.

    The relation holds row by row whenever ``supp(Q_F)`` lies inside
    ``supp(Q_R)``; ``support_ok`` records whether the supports coincide
    (the condition for Jarzynski). ``strict=True`` demands full rank.
    """
    a_f, a_r = _as_matrix(qf), _as_matrix(qr)
    rank_f, rank_r = la.rank(a_f), la.rank(a_r)
    if strict and (rank_f < a_f.shape[0] or rank_r < a_r.shape[0]):
        raise NotFullRank("Crooks statistics requested for rank-deficient Q_F or Q_R")
    op = sigma_operator(qf, qr)
    f, v = op.forward_eigvecs, op.reverse_eigvecs
    p_f = np.einsum("ik,ij,jk->k", f.conj(), a_f, f).real
    p_r = np.einsum("ik,ij,jk->k", v.conj(), a_r, v).real

    rows: List[CrooksRow] = []
    degenerate = False
    k = 0
    vals = op.eigenvalues
    while k < len(vals):
        j = k + 1
        while j < len(vals) and vals[j] - vals[j - 1] < DEGENERACY_BIN:
            j += 1
        if j - k > 1:
            degenerate = True
        pf, pr = float(p_f[k:j].sum()), float(p_r[k:j].sum())
        sig = float(vals[k:j].mean())
        # residual computed per member, then aggregated, so binning adds no error
        err = float(abs(np.sum(p_r[k:j] - np.exp(-vals[k:j]) * p_f[k:j])))
        rows.append(CrooksRow(sig, pf, pr, err))
        k = j
    return FluctuationReport(
        jarzynski_value=jarzynski(qf, op),
        crooks_rows=rows,
        support_ok=rank_f == rank_r,
        degenerate=degenerate,
        average=avg_def2(qf, qr, op),
    )


# ---------------------------------------------------------------------------
# locality in time
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalityDecomposition:
    rotation: np.ndarray
    input_term: np.ndarray
    output_term: np.ndarray

    def local_operator(self) -> np.ndarray:
        """``1_out (x) input_term - output_term (x) 1_in``."""
        d_out, d_in = self.output_term.shape[0], self.input_term.shape[0]
        return np.kron(np.eye(d_out), self.input_term) - np.kron(self.output_term, np.eye(d_in))


def locality_decomposition(
    channel: QuantumChannel, rho, gamma, tau, variant: bool = False
) -> LocalityDecomposition:
    """Global unitary ``U`` with ``U Sigma U^dagger`` equal to a sum of local terms.

    ``U = (1 (x) rho^T)^{-1/2} C_E^{-1/2} sqrt(Q_F)``. For singular ``rho`` the
    unitary factor of the polar decomposition
    ``(1 (x) sqrt(rho^T)) sqrt(C_E) = U sqrt(Q_F)`` is used instead.
    """
    if not channel.is_full_rank:
        raise NotFullRank("locality decomposition requires a full-rank Choi operator")
    rho, gamma, tau = density_matrix(rho), density_matrix(gamma), density_matrix(tau)
    d_out = channel.dim_out
    qf = q_forward(channel, rho).matrix
    if la.rank(rho) == rho.shape[0]:
        u = (
            np.kron(np.eye(d_out), la.inv_sqrtm_psd(rho).T)
            @ la.inv_sqrtm_psd(channel.choi)
            @ la.sqrtm_psd(qf)
        )
    else:
        u, _ = polar(np.kron(np.eye(d_out), la.sqrtm_psd(rho).T) @ channel.sqrt_choi, side="right")
    _require_support(rho, gamma)
    srt = la.sqrtm_psd(rho).T
    input_term = la.logm_psd(la.hermitize(srt @ la.inv_psd(gamma.T) @ srt))
    output_term = la.logm_psd(output_operator(channel, gamma, tau, variant))
    return LocalityDecomposition(u, input_term, output_term)


@dataclass(frozen=True)
class ThermalSpec:
    """Inverse temperature and the initial/final Hamiltonians."""

    beta: float
    hamiltonian_in: np.ndarray
    hamiltonian_out: np.ndarray

    def __post_init__(self):
        if self.beta < 0:
            raise PreconditionViolation("beta must be non-negative")
        object.__setattr__(self, "hamiltonian_in", la.check_hermitian(self.hamiltonian_in))
        object.__setattr__(self, "hamiltonian_out", la.check_hermitian(self.hamiltonian_out))

    @staticmethod
    def _log_z(beta: float, h: np.ndarray) -> float:
        e = np.linalg.eigvalsh(h)
        x = -beta * e
        top = x.max()
        return float(top + np.log(np.sum(np.exp(x - top))))

    @property
    def delta_f(self) -> float:
        """``-(log Z' - log Z) / beta``; at ``beta = 0`` the limit ``<H'> - <H>`` (equal dims)."""
        if self.beta == 0:
            return float(
                np.trace(self.hamiltonian_out).real / self.hamiltonian_out.shape[0]
                - np.trace(self.hamiltonian_in).real / self.hamiltonian_in.shape[0]
            )
        lz_in = self._log_z(self.beta, self.hamiltonian_in)
        lz_out = self._log_z(self.beta, self.hamiltonian_out)
        return -(lz_out - lz_in) / self.beta

    def thermal_in(self) -> np.ndarray:
        return _thermal(self.beta, self.hamiltonian_in)

    def thermal_out(self) -> np.ndarray:
        return _thermal(self.beta, self.hamiltonian_out)

    def work_spectrum(self) -> np.ndarray:
        """Sorted ``beta (E'_j - E_i - Delta F)``."""
        e_in = np.linalg.eigvalsh(self.hamiltonian_in)
        e_out = np.linalg.eigvalsh(self.hamiltonian_out)
        return np.sort(self.beta * (e_out[:, None] - e_in[None, :] - self.delta_f).ravel())


def _thermal(beta: float, h: np.ndarray) -> np.ndarray:
    g = la.spectral_fn(-beta * h, "exp")
    return g / np.trace(g).real


class WorkCheck(NamedTuple):
    matched: bool
    max_dev: float


def work_operator_check(channel: QuantumChannel, spec: ThermalSpec, tol: float = 1e-7) -> WorkCheck:
    """Compare the spectrum of ``Sigma`` with that of ``beta (Omega - Delta F)``.

    Uses ``gamma = 1/d``, ``rho`` thermal for the initial Hamiltonian and
    ``tau`` thermal for the final one.
    """
    from .channels import channel_rank_flags

    if not channel_rank_flags(channel).unital:
        raise PreconditionViolation("work operator reduction requires a unital channel")
    if not channel.is_full_rank:
        raise NotFullRank("work operator reduction requires a full-rank Choi operator")
    gamma = np.eye(channel.dim_in) / channel.dim_in
    rho, tau = spec.thermal_in(), spec.thermal_out()
    op = sigma_operator(q_forward(channel, rho), q_reverse(channel, gamma, tau))
    dev = float(np.max(np.abs(np.sort(op.eigenvalues) - spec.work_spectrum())))
    return WorkCheck(dev < tol, dev)


# ---------------------------------------------------------------------------
# superadditivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuperadditivityReport:
    avg_step1: float
    avg_step2: float
    avg_total: float
    gap: float
    closed_form: float

    def to_dict(self) -> dict:
        return {
            "avg1": self.avg_step1,
            "avg2": self.avg_step2,
            "avg12": self.avg_total,
            "gap": self.gap,
            "closed_form": self.closed_form,
        }


def superadditivity(
    e1: QuantumChannel,
    e2: QuantumChannel,
    rho,
    gamma,
    tau1,
    tau2,
    variant: bool = False,
) -> SuperadditivityReport:
    """Entropy production of two steps versus the composed process.

    The second step is reversed with the propagated prior ``E1(gamma)``; the
    whole process ``E2 o E1`` with the prior ``gamma``.
    """
    if not (e1.is_full_rank and e2.is_full_rank):
        raise NotFullRank("superadditivity requires full-rank Choi operators")
    rho, gamma = density_matrix(rho), density_matrix(gamma)
    total = compose(e2, e1)
    e1_rho, e1_gamma = apply(e1, rho), apply(e1, gamma)
    if la.rank(gamma) < gamma.shape[0] or la.rank(e1_gamma) < e1_gamma.shape[0]:
        raise SingularPrior("gamma and E1(gamma) must be full rank")

    avg1 = avg_def2(q_forward(e1, rho), q_reverse(e1, gamma, tau1, variant))
    avg2 = avg_def2(q_forward(e2, e1_rho), q_reverse(e2, e1_gamma, tau2, variant))
    avg12 = avg_def2(q_forward(total, rho), q_reverse(total, gamma, tau2, variant))
    m1 = output_operator(e1, gamma, density_matrix(tau1), variant)
    closed = bs_divergence(e1_rho, e1_gamma) - float(np.trace(e1_rho @ la.logm_psd(m1)).real)
    return SuperadditivityReport(avg1, avg2, avg12, avg1 + avg2 - avg12, closed)


# ---------------------------------------------------------------------------
# quantum-classical channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QCEntropy:
    operator: EntropyOperator
    block_matrix: np.ndarray
    average: float


def qc_block_operator(povm: Povm, rho, gamma, tau) -> np.ndarray:
    """Block-diagonal entropy operator of the measurement channel.

    Block ``i`` is ``Sigma[sqrt(Pi_i) rho sqrt(Pi_i), sqrt(Pi_i) gamma sqrt(Pi_i)]^T``
    minus ``log(tau_i / M(gamma)_i)`` on the support of that block.
    """
    d, m = povm.dim, len(povm)
    m_gamma = povm.probabilities(gamma)
    tau_diag = np.diag(tau).real
    out = np.zeros((m * d, m * d), dtype=complex)
    for i, e in enumerate(povm.effects):
        se = la.sqrtm_psd(e)
        a = la.hermitize(se @ rho @ se)
        if np.trace(a).real <= la.SUPPORT_CUTOFF:
            continue
        b = la.hermitize(se @ gamma @ se)
        _require_support(a, b, "sqrt(Pi) rho sqrt(Pi)")
        if tau_diag[i] <= 0:
            raise SupportMismatch(f"tau has no weight on outcome {i} observed with rho")
        sa = la.sqrtm_psd(a)
        block = la.logm_psd(la.hermitize(sa @ la.inv_psd(b) @ sa))
        block -= np.log(tau_diag[i] / m_gamma[i]) * la.support_projector(a)
        out[i * d:(i + 1) * d, i * d:(i + 1) * d] = block.T
    return out


def qc_entropy(povm, rho, gamma, tau) -> QCEntropy:
    """Entropy production of a measurement with diagonal reverse input ``tau``.

    Raises
    ------
    PreconditionViolation
        If ``tau`` is not diagonal in the outcome basis.
    """
    if not isinstance(povm, Povm):
        povm = Povm(tuple(povm))
    rho, gamma, tau = density_matrix(rho), density_matrix(gamma), density_matrix(tau)
    if np.max(np.abs(tau - np.diag(np.diag(tau)))) > 1e-12:
        raise PreconditionViolation("tau must be diagonal in the measurement basis")
    chan = measurement_channel(povm)
    qf = q_forward(chan, rho)
    op = sigma_operator(qf, q_reverse(chan, gamma, tau))
    block = qc_block_operator(povm, rho, gamma, tau)
    return QCEntropy(op, block, float(np.trace(qf.matrix @ block).real))


def observational_entropy(povm, rho, gamma) -> float:
    """``S(rho) + D_BS(rho||gamma) - D(M(rho)||M(gamma))``."""
    if not isinstance(povm, Povm):
        povm = Povm(tuple(povm))
    rho, gamma = density_matrix(rho), density_matrix(gamma)
    m_rho = np.diag(povm.probabilities(rho)).astype(complex)
    m_gamma = np.diag(povm.probabilities(gamma)).astype(complex)
    return von_neumann_entropy(rho) + bs_divergence(rho, gamma) - umegaki(m_rho, m_gamma)
