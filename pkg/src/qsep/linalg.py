"""Spectral calculus on complex Hermitian matrices.

Every matrix function used by the package goes through :func:`spectral_fn`,
which applies a scalar function to the eigenvalues of a Hermitian matrix.
Logarithms and inverses are taken on the support only: eigenvalues at or
below ``support_cutoff * max|eigenvalue|`` are mapped to zero.

All transposes are taken in the fixed computational basis.
"""
from __future__ import annotations

from typing import Callable, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch, NegativeSpectrum, NonHermitianInput

SUPPORT_CUTOFF = 1e-12
HERMITICITY_TOL = 1e-10

# functions that need a PSD argument and are restricted to the support
_PSD_FUNCTIONS = {"sqrt", "log", "inv", "inv_sqrt", "power"}


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {a.shape}")
    return a


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def check_hermitian(m, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate Hermiticity and return the re-Hermitized matrix.

    The deviation ``max|M - M^dagger|`` is compared against ``tol`` scaled by
    ``max(1, max|M|)`` so that large-norm operators (inverses of nearly
    singular states) are not rejected for rounding noise.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    dev = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if dev > tol * scale:
        raise NonHermitianInput(f"matrix deviates from Hermitian by {dev:.3e}")
    return hermitize(a)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # make the first non-negligible component of each column real positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-8)
        if idx.size:
            c = col[idx[0]]
            out[:, k] = col * (abs(c) / c)
    return out


def eig_hermitian(m) -> EigenDecomposition:
    """Eigendecomposition with ascending eigenvalues and fixed eigenvector phases.

    Raises
    ------
    NonHermitianInput
        If ``m`` is not Hermitian within tolerance.
    """
    a = check_hermitian(m)
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w, _fix_phases(v))


FnSpec = Union[str, Tuple[str, float], Callable[[np.ndarray], np.ndarray]]


def _scalar_fn(fn: FnSpec, p: float | None) -> Tuple[str, Callable[[np.ndarray], np.ndarray]]:
    if isinstance(fn, tuple):
        fn, p = fn
    if callable(fn):
        return "callable", fn
    table = {
        "sqrt": np.sqrt,
        "log": np.log,
        "inv": lambda x: 1.0 / x,
        "inv_sqrt": lambda x: 1.0 / np.sqrt(x),
        "exp": np.exp,
    }
    if fn == "power":
        if p is None:
            raise ValueError("power requires an exponent p")
        return "power", lambda x: x ** p
    if fn not in table:
        raise ValueError(f"unknown spectral function {fn!r}")
    return fn, table[fn]


def spectral_fn(
    m,
    fn: FnSpec,
    support_cutoff: float = SUPPORT_CUTOFF,
    p: float | None = None,
) -> np.ndarray:
    """Apply a scalar function to the spectrum of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Hermitian matrix.
    fn : str, tuple or callable
        One of ``"sqrt"``, ``"log"``, ``"inv"``, ``"inv_sqrt"``, ``"exp"``,
        ``"power"`` (with ``p``), or ``("power", p)``. A callable is applied
        to the whole spectrum without any support restriction.
    support_cutoff : float
        Relative threshold below which eigenvalues count as zero for the
        support-restricted functions.

    Returns
    -------
    numpy.ndarray
        ``f(m)``, Hermitized.
    """
    name, f = _scalar_fn(fn, p)
    w, v = eig_hermitian(m)
    if name in _PSD_FUNCTIONS:
        scale = float(np.max(np.abs(w))) if w.size else 0.0
        thresh = support_cutoff * scale
        if w.size and w[0] < -thresh:
            raise NegativeSpectrum(f"eigenvalue {w[0]:.3e} below -{thresh:.3e}")
        keep = w > thresh
        fw = np.zeros_like(w)
        fw[keep] = f(w[keep])
    else:
        fw = f(w)
    return hermitize((v * fw) @ v.conj().T)


def sqrtm_psd(m, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return spectral_fn(m, "sqrt", cutoff)


def logm_psd(m, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return spectral_fn(m, "log", cutoff)


def inv_psd(m, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return spectral_fn(m, "inv", cutoff)


def inv_sqrtm_psd(m, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return spectral_fn(m, "inv_sqrt", cutoff)


def support_projector(m, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    w, v = eig_hermitian(m)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    cols = v[:, w > cutoff * scale]
    return cols @ cols.conj().T


def rank(m, cutoff: float = SUPPORT_CUTOFF) -> int:
    w = np.linalg.eigvalsh(check_hermitian(m))
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    return int(np.count_nonzero(w > cutoff * scale))


def support_contained(a, b, cutoff: float = SUPPORT_CUTOFF, tol: float = 1e-8) -> bool:
    """True if supp(a) is contained in supp(b) for PSD ``a`` and ``b``."""
    a = as_matrix(a)
    leak = (np.eye(a.shape[0]) - support_projector(b, cutoff)) @ a
    scale = max(float(np.max(np.abs(a))), 1e-300)
    return float(np.max(np.abs(leak))) <= tol * scale


def partial_trace(m, dims: Sequence[int], keep: int) -> np.ndarray:
    """Partial trace of an operator on ``A (x) B``.

    ``keep=0`` traces out the second factor and returns an operator on A;
    ``keep=1`` traces out the first factor and returns an operator on B.
    """
    a = as_matrix(m)
    da, db = (int(d) for d in dims)
    if a.shape != (da * db, da * db):
        raise DimensionMismatch(f"shape {a.shape} incompatible with dims {(da, db)}")
    t = a.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise ValueError("keep must be 0 or 1")


def transpose_fixed_basis(m) -> np.ndarray:
    """Plain transpose in the computational basis (no conjugation)."""
    return as_matrix(m).T.copy()


def swap_operator(da: int, db: int) -> np.ndarray:
    """Unitary mapping ``|a>|b>`` on ``A (x) B`` to ``|b>|a>`` on ``B (x) A``."""
    s = np.zeros((da * db, da * db))
    for i in range(da):
        for j in range(db):
            s[j * da + i, i * db + j] = 1.0
    return s


def ket(i: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def unit(i: int, j: int, d: int) -> np.ndarray:
    """Matrix unit ``|i><j|``."""
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def max_entangled(d: int) -> np.ndarray:
    """Unnormalized ``|Phi+> = sum_i |i>|i>`` as a column vector."""
    return np.eye(d, dtype=complex).reshape(d * d, 1)
