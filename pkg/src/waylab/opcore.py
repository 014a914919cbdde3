"""Dense operators on small finite-dimensional Hilbert spaces.

Everything downstream works with explicit complex matrices, so this module
fixes the conventions once: square :class:`Operator` wrappers, a shared
:class:`Tolerance` pair (``eq_tol`` for equality of operators, ``rank_tol``
for rank/spectral-gap decisions), Kronecker ordering with the first factor
slowest, and column-stacking vectorization used by the supermatrix code.

Composite indices follow ``i = i_first * dim_second + i_second``: for a
system-apparatus space the system index varies slowest, which is exactly
``numpy.kron(system_op, apparatus_op)``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Operator",
    "tensor",
    "partial_trace",
    "op_norm",
    "psd_sqrt",
    "fidelity",
    "eigenspace_projector",
    "commutator",
    "hermitian_basis",
    "gram_schmidt_hs",
]

MatrixLike = Union["Operator", np.ndarray, Sequence[Sequence[complex]]]


@dataclasses.dataclass(frozen=True)
class Tolerance:
    """Shared numerical thresholds.

    ``eq_tol`` decides operator equalities and inequality slacks; ``rank_tol``
    decides rank and eigenvalue-cluster membership.  Both must be strictly
    positive and finite.
    """

    eq_tol: float = 1e-9
    rank_tol: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("eq_tol", "rank_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive and finite, got {value!r}")

    def with_eq_tol(self, eq_tol: float) -> "Tolerance":
        return Tolerance(eq_tol=eq_tol, rank_tol=self.rank_tol)


DEFAULT_TOL = Tolerance()


def _as_matrix(a: MatrixLike) -> np.ndarray:
    if isinstance(a, Operator):
        return a.mat
    m = np.asarray(a, dtype=complex)
    return m


class Operator:
    """A square complex matrix on a single finite-dimensional space.

    The wrapped array is read-only; arithmetic returns new instances.
    Predicates take a :class:`Tolerance` and answer against the spectrum of
    the (symmetrized, where appropriate) matrix rather than entrywise.
    """

    __slots__ = ("_mat",)

    def __init__(self, mat: MatrixLike):
        m = np.array(_as_matrix(mat), dtype=complex, copy=True, order="C")
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        if m.shape[0] == 0:
            raise ValueError("operator dimension must be at least 1")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("operator entries must be finite")
        m.setflags(write=False)
        self._mat = m

    @property
    def mat(self) -> np.ndarray:
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    @property
    def H(self) -> "Operator":
        return Operator(self._mat.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self._mat))

    def hermitian_part(self) -> "Operator":
        return Operator(0.5 * (self._mat + self._mat.conj().T))

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self._mat + _as_matrix(other))

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self._mat - _as_matrix(other))

    def __neg__(self) -> "Operator":
        return Operator(-self._mat)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self._mat * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "Operator":
        return Operator(self._mat / scalar)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self._mat @ _as_matrix(other))

    def __repr__(self) -> str:
        return f"Operator(dim={self.dim})"

    # -- predicates ------------------------------------------------------

    def is_hermitian(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return op_norm_mat(self._mat - self._mat.conj().T) <= tol.eq_tol

    def is_psd(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        w = np.linalg.eigvalsh(0.5 * (self._mat + self._mat.conj().T))
        return bool(w.min() >= -tol.eq_tol)

    def is_effect(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        w = np.linalg.eigvalsh(0.5 * (self._mat + self._mat.conj().T))
        return bool(w.min() >= -tol.eq_tol and w.max() <= 1.0 + tol.eq_tol)

    def is_projection(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        return op_norm_mat(self._mat @ self._mat - self._mat) <= tol.eq_tol

    def is_state(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.is_psd(tol) and abs(np.trace(self._mat) - 1.0) <= tol.eq_tol

    def is_unitary(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        d = self.dim
        return op_norm_mat(self._mat.conj().T @ self._mat - np.eye(d)) <= tol.eq_tol

    # -- constructors ----------------------------------------------------

    @staticmethod
    def identity(dim: int) -> "Operator":
        return Operator(np.eye(dim))

    @staticmethod
    def zero(dim: int) -> "Operator":
        return Operator(np.zeros((dim, dim)))


def op_norm_mat(m: np.ndarray) -> float:
    """Largest singular value of a raw matrix."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def op_norm(a: MatrixLike) -> float:
    """Operator norm (largest singular value)."""
    return op_norm_mat(_as_matrix(a))


def commutator(a: MatrixLike, b: MatrixLike) -> Operator:
    am, bm = _as_matrix(a), _as_matrix(b)
    return Operator(am @ bm - bm @ am)


def tensor(a: MatrixLike, b: MatrixLike) -> Operator:
    """Kronecker product with the first factor's index slowest."""
    return Operator(np.kron(_as_matrix(a), _as_matrix(b)))


def partial_trace(t: MatrixLike, keep: Union[int, str], dims: tuple[int, int]) -> Operator:
    """Trace out one tensor factor of an operator on a bipartite space.

    ``dims = (d_first, d_second)`` with the first factor slowest.  ``keep``
    selects the surviving factor: ``0``/``"S"`` for the first, ``1``/``"A"``
    for the second.
    """
    m = _as_matrix(t)
    d1, d2 = dims
    if d1 <= 0 or d2 <= 0:
        raise ValueError(f"dims must be positive, got {dims}")
    if m.shape != (d1 * d2, d1 * d2):
        raise ValueError(f"operator shape {m.shape} does not match dims {dims}")
    if isinstance(keep, str):
        key = keep.upper()
        if key in ("S", "SYS", "SYSTEM", "0"):
            keep_idx = 0
        elif key in ("A", "APP", "APPARATUS", "1"):
            keep_idx = 1
        else:
            raise ValueError(f"unknown subsystem id {keep!r}")
    else:
        keep_idx = int(keep)
        if keep_idx not in (0, 1):
            raise ValueError(f"keep must be 0 or 1, got {keep}")
    r = m.reshape(d1, d2, d1, d2)
    if keep_idx == 0:
        return Operator(np.einsum("iaja->ij", r))
    return Operator(np.einsum("iaib->ab", r))


def psd_sqrt(a: MatrixLike, tol: Tolerance = DEFAULT_TOL) -> Operator:
    """Principal square root of a positive semidefinite operator.

    The input is symmetrized before diagonalizing; eigenvalues below
    ``-eq_tol`` are rejected (the error names the most negative one) and
    small negative noise is clipped to zero.  Eigenvalues at the
    diagonalization noise floor (``dim * eps * max eigenvalue``) are snapped
    to zero as well, since the square root would otherwise turn them into
    ``sqrt(eps)``-sized kernel components.
    """
    m = _as_matrix(a)
    h = 0.5 * (m + m.conj().T)
    if op_norm_mat(m - h) > tol.eq_tol:
        raise ValueError("psd_sqrt requires a Hermitian operator")
    w, v = np.linalg.eigh(h)
    if w.min() < -tol.eq_tol:
        raise ValueError(
            f"psd_sqrt requires a positive semidefinite operator; "
            f"most negative eigenvalue is {w.min():.6e}"
        )
    w = np.clip(w, 0.0, None)
    w[w < w[-1] * h.shape[0] * np.finfo(float).eps] = 0.0
    return Operator((v * np.sqrt(w)) @ v.conj().T)


def fidelity(rho: MatrixLike, sigma: MatrixLike, tol: Tolerance = DEFAULT_TOL) -> float:
    """State fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Both arguments must be density operators; the squared-trace convention
    makes ``fidelity(rho, rho) == 1`` and orthogonal pure states give 0.
    """
    r = Operator(rho)
    s = Operator(sigma)
    if not r.is_state(tol):
        raise ValueError("fidelity: first argument is not a density operator")
    if not s.is_state(tol):
        raise ValueError("fidelity: second argument is not a density operator")
    sq = psd_sqrt(r, tol).mat
    inner = sq @ s.mat @ sq
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    w = np.clip(w, 0.0, None)
    val = float(np.sum(np.sqrt(w)) ** 2)
    return max(val, 0.0)


def eigenspace_projector(a: MatrixLike, value: float, tol: Tolerance = DEFAULT_TOL) -> Operator:
    """Orthogonal projector onto the eigenspace of ``a`` near ``value``.

    Starts from every eigenvalue within ``rank_tol`` of ``value`` and then
    grows the selection while neighbouring eigenvalues sit within a
    ``rank_tol`` gap, so nearly degenerate clusters are never split.  Returns
    the zero operator when no eigenvalue qualifies.  ``a`` must be Hermitian.
    """
    m = _as_matrix(a)
    h = 0.5 * (m + m.conj().T)
    if op_norm_mat(m - h) > tol.eq_tol:
        raise ValueError("eigenspace_projector requires a Hermitian operator")
    w, v = np.linalg.eigh(h)
    hit = np.abs(w - value) <= tol.rank_tol
    if not hit.any():
        return Operator.zero(m.shape[0])
    lo = int(np.argmax(hit))
    hi = len(w) - 1 - int(np.argmax(hit[::-1]))
    while lo > 0 and w[lo] - w[lo - 1] <= tol.rank_tol:
        lo -= 1
    while hi < len(w) - 1 and w[hi + 1] - w[hi] <= tol.rank_tol:
        hi += 1
    cols = v[:, lo : hi + 1]
    return Operator(cols @ cols.conj().T)


def gram_schmidt_hs(
    mats: Iterable[np.ndarray], rank_tol: float = DEFAULT_TOL.rank_tol
) -> list[np.ndarray]:
    """Hilbert-Schmidt Gram-Schmidt, dropping nearly dependent members."""
    basis: list[np.ndarray] = []
    for m in mats:
        v = np.array(m, dtype=complex)
        for b in basis:
            v = v - np.vdot(b, v) * b
        norm = float(np.linalg.norm(v))
        if norm > rank_tol:
            basis.append(v / norm)
    return basis


def hermitian_basis(
    mats: Iterable[np.ndarray], rank_tol: float = DEFAULT_TOL.rank_tol
) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of the *-closed span of ``mats``.

    Splits each matrix into Hermitian and anti-Hermitian parts (times i) and
    orthonormalizes in the Hilbert-Schmidt inner product.  Useful for fixed
    spaces of dual channels, which are closed under adjoints.
    """
    parts: list[np.ndarray] = []
    for m in mats:
        a = np.asarray(m, dtype=complex)
        parts.append(0.5 * (a + a.conj().T))
        parts.append(0.5j * (a.conj().T - a))
    return gram_schmidt_hs(parts, rank_tol)
