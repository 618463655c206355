"""CPTP maps in Choi form.

Choi operators are stored on ``H_out (x) H_in`` (output factor first),

    C = sum_ij E(|i><j|) (x) |i><j|,

so that every bipartite operator built from a channel lives on the same
ordered space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, InvalidParameter, NotCPTP

TP_TOL = 1e-9
STATE_TRACE_TOL = 1e-10
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def density_matrix(m, tol: float = STATE_TRACE_TOL) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD, unit trace) and return it Hermitized."""
    a = la.check_hermitian(m)
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol:
        raise InvalidParameter(f"trace {tr:.12f} != 1")
    w = np.linalg.eigvalsh(a)
    if w[0] < -max(la.SUPPORT_CUTOFF * w[-1], 1e-12):
        raise InvalidParameter(f"state has negative eigenvalue {w[0]:.3e}")
    return a


def bloch_state(x: float, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    """Qubit state ``(1 + xX + yY + zZ) / 2``."""
    if x * x + y * y + z * z > 1.0 + 1e-12:
        raise InvalidParameter(f"Bloch vector ({x}, {y}, {z}) lies outside the unit ball")
    return 0.5 * (np.eye(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


class QuantumChannel:
    """A CPTP map ``H_in -> H_out`` represented by its Choi operator.

    The square root of the Choi operator is computed lazily and cached; the
    cached value is write-once, so instances can be shared between threads.
    """

    def __init__(self, choi, dim_in: int, dim_out: int, validate: bool = True):
        c = la.check_hermitian(choi)
        if c.shape != (dim_in * dim_out, dim_in * dim_out):
            raise DimensionMismatch(
                f"choi shape {c.shape} does not match dim_out*dim_in = {dim_out}*{dim_in}"
            )
        self.dim_in = int(dim_in)
        self.dim_out = int(dim_out)
        self.choi = c
        self.choi.setflags(write=False)
        if validate:
            self._validate()

    def _validate(self) -> None:
        w = np.linalg.eigvalsh(self.choi)
        if w[0] < -max(1e-9, 1e-9 * w[-1]):
            raise NotCPTP(f"Choi operator has negative eigenvalue {w[0]:.3e}")
        marg = la.partial_trace(self.choi, (self.dim_out, self.dim_in), keep=1)
        dev = float(np.max(np.abs(marg - np.eye(self.dim_in))))
        if dev > TP_TOL:
            raise NotCPTP(f"channel is not trace preserving (deviation {dev:.3e})")

    def __repr__(self) -> str:
        return f"QuantumChannel(dim_in={self.dim_in}, dim_out={self.dim_out})"

    @property
    def dims(self) -> tuple[int, int]:
        """``(dim_out, dim_in)``, the factor order of the Choi operator."""
        return (self.dim_out, self.dim_in)

    @cached_property
    def sqrt_choi(self) -> np.ndarray:
        s = la.sqrtm_psd(self.choi)
        s.setflags(write=False)
        return s

    @cached_property
    def choi_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.choi)

    @property
    def choi_rank(self) -> int:
        w = self.choi_eigenvalues
        return int(np.count_nonzero(w > la.SUPPORT_CUTOFF * w[-1]))

    @property
    def is_full_rank(self) -> bool:
        return self.choi_rank == self.choi.shape[0]

    @property
    def is_unitary(self) -> bool:
        return self.choi_rank == 1 and self.dim_in == self.dim_out

    def _tensor(self) -> np.ndarray:
        d_o, d_i = self.dim_out, self.dim_in
        return self.choi.reshape(d_o, d_i, d_o, d_i)

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)


def _check_input(channel: QuantumChannel, m) -> np.ndarray:
    a = la.as_matrix(m)
    if a.shape != (channel.dim_in, channel.dim_in):
        raise DimensionMismatch(f"input shape {a.shape} but channel dim_in = {channel.dim_in}")
    return a


def apply(channel: QuantumChannel, rho) -> np.ndarray:
    """``E(rho) = Tr_in[C (1 (x) rho^T)]``. Linear, so any square input is accepted."""
    a = _check_input(channel, rho)
    return np.einsum("aibj,ij->ab", channel._tensor(), a)


def adjoint_apply(channel: QuantumChannel, sigma) -> np.ndarray:
    """Heisenberg-picture map ``E^dagger(sigma)``."""
    s = la.as_matrix(sigma)
    if s.shape != (channel.dim_out, channel.dim_out):
        raise DimensionMismatch(f"sigma shape {s.shape} but channel dim_out = {channel.dim_out}")
    return np.einsum("ajbi,ba->ij", channel._tensor(), s)


def choi_from_kraus(kraus: Iterable) -> QuantumChannel:
    ops = [la.as_matrix(k) for k in kraus]
    if not ops:
        raise NotCPTP("empty Kraus set")
    d_out, d_in = ops[0].shape
    if any(k.shape != (d_out, d_in) for k in ops):
        raise DimensionMismatch("Kraus operators have inconsistent shapes")
    completeness = sum(k.conj().T @ k for k in ops)
    dev = float(np.max(np.abs(completeness - np.eye(d_in))))
    if dev > TP_TOL:
        raise NotCPTP(f"Kraus operators are not complete (deviation {dev:.3e})")
    vecs = np.stack([k.reshape(-1) for k in ops], axis=1)
    return QuantumChannel(vecs @ vecs.conj().T, d_in, d_out)


def choi_from_action(action, dim_in: int, dim_out: int, validate: bool = True) -> QuantumChannel:
    """Build the Choi operator from a linear map evaluated on matrix units."""
    c = np.zeros((dim_out, dim_in, dim_out, dim_in), dtype=complex)
    for i in range(dim_in):
        for j in range(dim_in):
            c[:, i, :, j] = action(la.unit(i, j, dim_in))
    n = dim_in * dim_out
    return QuantumChannel(c.reshape(n, n), dim_in, dim_out, validate=validate)


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """Choi operator of ``second o first``."""
    if first.dim_out != second.dim_in:
        raise DimensionMismatch(
            f"cannot compose: first.dim_out={first.dim_out}, second.dim_in={second.dim_in}"
        )
    c = np.einsum("ambn,minj->aibj", second._tensor(), first._tensor())
    n = second.dim_out * first.dim_in
    return QuantumChannel(c.reshape(n, n), first.dim_in, second.dim_out)


def identity_channel(d: int) -> QuantumChannel:
    return choi_from_kraus([np.eye(d)])


def unitary_channel(u) -> QuantumChannel:
    return choi_from_kraus([u])


def depolarizing_channel(d: int, p: float = 1.0) -> QuantumChannel:
    """``rho -> (1 - p) rho + p Tr[rho] 1/d``; ``p = 1`` is completely depolarizing."""
    ident = identity_channel(d).choi
    c = (1 - p) * ident + p * np.eye(d * d) / d
    return QuantumChannel(c, d, d)


def stinespring(channel: QuantumChannel) -> np.ndarray:
    """Isometry ``V: H_in -> H_out (x) H_env`` with ``H_env = H_out' (x) H_in'``.

    ``V = (1_B (x) sqrt(C^T)) (|Phi+>_{BB'} (x) 1_{A'<-A})``. The environment
    keeps the full ``dim_out * dim_in`` size, no Kraus-rank reduction.
    """
    d_o, d_i = channel.dim_out, channel.dim_in
    d_env = d_o * d_i
    sqrt_ct = channel.sqrt_choi.T
    v = np.zeros((d_o * d_env, d_i), dtype=complex)
    for b in range(d_o):
        v[b * d_env:(b + 1) * d_env, :] = sqrt_ct[:, b * d_i:(b + 1) * d_i]
    return v


def complementary_apply(channel: QuantumChannel, rho) -> np.ndarray:
    """Environment marginal ``Tr_B[V rho V^dagger]`` of the Stinespring dilation."""
    a = _check_input(channel, rho)
    v = stinespring(channel)
    joint = v @ a @ v.conj().T
    return la.partial_trace(joint, (channel.dim_out, channel.dim_out * channel.dim_in), keep=1)


@dataclass(frozen=True)
class Povm:
    effects: tuple

    def __post_init__(self):
        effects = tuple(la.check_hermitian(e) for e in self.effects)
        if not effects:
            raise NotCPTP("empty POVM")
        d = effects[0].shape[0]
        for e in effects:
            if e.shape != (d, d):
                raise DimensionMismatch("POVM effects have inconsistent shapes")
            if np.linalg.eigvalsh(e)[0] < -1e-12:
                raise NotCPTP("POVM effect is not positive semidefinite")
        dev = float(np.max(np.abs(sum(effects) - np.eye(d))))
        if dev > TP_TOL:
            raise NotCPTP(f"POVM effects do not sum to identity (deviation {dev:.3e})")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)

    def probabilities(self, rho) -> np.ndarray:
        return np.array([np.trace(e @ rho).real for e in self.effects])


def measurement_channel(povm) -> QuantumChannel:
    """Quantum-classical channel ``M(rho) = sum_i Tr[Pi_i rho] |i><i|``."""
    if not isinstance(povm, Povm):
        povm = Povm(tuple(povm))
    d, m = povm.dim, len(povm)
    c = np.zeros((m, d, m, d), dtype=complex)
    for i, e in enumerate(povm.effects):
        c[i, :, i, :] = e.T
    return QuantumChannel(c.reshape(m * d, m * d), d, m)


@dataclass(frozen=True)
class CollisionModel:
    """Partial-swap collisional model with a diagonal ancilla state ``xi``.

    ``xi_population`` is ``<0|xi|0>``. ``xi_coherence`` must be zero; the
    interaction is defined in the eigenbasis of ``xi``.
    """

    xi_population: float
    phi: float
    n: int = 1
    xi_coherence: complex = 0.0

    def __post_init__(self):
        if not 0.0 <= self.xi_population <= 1.0:
            raise InvalidParameter(f"xi_population={self.xi_population} outside [0, 1]")
        if self.xi_coherence != 0:
            raise InvalidParameter("xi must be diagonal in the computational basis")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter(f"n must be a positive integer, got {self.n}")

    @property
    def xi(self) -> np.ndarray:
        return np.diag([self.xi_population, 1.0 - self.xi_population]).astype(complex)

    @property
    def c(self) -> float:
        return float(np.cos(self.phi))

    @property
    def k(self) -> complex:
        phi = self.phi
        return 0.5 * (1 + np.cos(2 * phi) + 1j * np.sin(2 * phi) * (2 * self.xi_population - 1))

    def with_n(self, n: int) -> "CollisionModel":
        return CollisionModel(self.xi_population, self.phi, n, self.xi_coherence)

    def unitary(self) -> np.ndarray:
        """``cos(phi) 1 + i sin(phi) SWAP`` on system (x) ancilla."""
        return np.cos(self.phi) * np.eye(4) + 1j * np.sin(self.phi) * la.swap_operator(2, 2)

    def kraus(self) -> list:
        """Kraus operators of a single collision, ``<a| U |b> sqrt(xi_b)``."""
        u = self.unitary().reshape(2, 2, 2, 2)  # (sys_out, anc_out, sys_in, anc_in)
        pops = [self.xi_population, 1.0 - self.xi_population]
        return [np.sqrt(pops[b]) * u[:, a, :, b] for a in range(2) for b in range(2) if pops[b] > 0]

    def closed_form(self, x: np.ndarray) -> np.ndarray:
        """Action of ``N^n`` on an arbitrary 2x2 matrix."""
        c2n = self.c ** (2 * self.n)
        kn = self.k ** self.n
        tr = x[0, 0] + x[1, 1]
        p0 = self.xi_population
        return np.array(
            [
                [c2n * x[0, 0] + (1 - c2n) * p0 * tr, kn * x[0, 1]],
                [np.conj(kn) * x[1, 0], c2n * x[1, 1] + (1 - c2n) * (1 - p0) * tr],
            ],
            dtype=complex,
        )


def collision_channel(model: CollisionModel) -> QuantumChannel:
    """Choi operator of ``N^n`` from the closed-form action (stable for large ``n``)."""
    return choi_from_action(model.closed_form, 2, 2)


def collision_channel_iterated(model: CollisionModel) -> QuantumChannel:
    """``N^n`` by explicit Kraus iteration; cross-check for :func:`collision_channel`."""
    single = choi_from_kraus(model.kraus())
    out = single
    for _ in range(model.n - 1):
        out = compose(single, out)
    return out


class RankFlags(NamedTuple):
    full_rank_choi: bool
    unital: bool
    unitary: bool


def channel_rank_flags(channel: QuantumChannel) -> RankFlags:
    mixed_in = np.eye(channel.dim_in) / channel.dim_in
    unital = bool(
        np.max(np.abs(apply(channel, mixed_in) - np.eye(channel.dim_out) / channel.dim_out)) < 1e-10
    )
    return RankFlags(channel.is_full_rank, unital, channel.is_unitary)
