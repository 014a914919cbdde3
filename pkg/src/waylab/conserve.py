"""Additive conserved quantities and how well channels respect them.

Average conservation of ``N`` under a channel ``Phi`` means ``Phi*(N) = N``;
full conservation additionally requires ``Phi*(N^2) = N^2`` (which forces
all higher moments).  For unitary channels both notions collapse to
``[U, N] = 0``, and :func:`check_unitary_equivalence` verifies the three
defects agree on zero versus nonzero.

:func:`qfi` is the quantum Fisher information of ``exp(-itN)`` encoding in
the symmetric-logarithmic-derivative closed form; pure states give four
times the variance and states commuting with ``N`` give zero.
"""

from __future__ import annotations

import dataclasses
from typing import Any

import numpy as np
import scipy.linalg

from .cpmaps import OperationMap, apply_dual
from .measure import MeasurementScheme, heisenberg_pointer
from .opcore import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    commutator,
    op_norm,
    op_norm_mat,
    tensor,
)

__all__ = [
    "AdditiveQuantity",
    "ConservationReport",
    "UnitaryConservationReport",
    "YanaseReport",
    "check_conservation",
    "check_unitary_equivalence",
    "variance",
    "qfi",
    "conservative_unitary",
    "yanase_conditions",
]


@dataclasses.dataclass(frozen=True)
class AdditiveQuantity:
    """System and apparatus parts of an additively conserved quantity."""

    n_sys: Operator
    n_app: Operator

    def __post_init__(self) -> None:
        for name in ("n_sys", "n_app"):
            part = getattr(self, name)
            if not isinstance(part, Operator):
                object.__setattr__(self, name, Operator(part))
        if not self.n_sys.is_hermitian(DEFAULT_TOL):
            raise ValueError("n_sys must be Hermitian")
        if not self.n_app.is_hermitian(DEFAULT_TOL):
            raise ValueError("n_app must be Hermitian")

    def composite(self) -> Operator:
        """``N = n_sys (x) 1 + 1 (x) n_app`` with the system slowest."""
        ds, da = self.n_sys.dim, self.n_app.dim
        return tensor(self.n_sys, np.eye(da)) + tensor(np.eye(ds), self.n_app)


@dataclasses.dataclass(frozen=True)
class ConservationReport:
    average_defect: float
    full_defect: float
    average_holds: bool
    full_holds: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _require_hermitian(n: Any, tol: Tolerance, what: str) -> Operator:
    op = n if isinstance(n, Operator) else Operator(n)
    if not op.is_hermitian(tol):
        raise ValueError(f"{what} must be Hermitian")
    return op


def check_conservation(
    phi: OperationMap, n: Any, tol: Tolerance = DEFAULT_TOL
) -> ConservationReport:
    """Defects ``||Phi*(N) - N||`` and ``||Phi*(N^2) - N^2||``.

    ``full_holds`` requires both moments; deciding on the first two moments
    suffices because higher moments then follow by induction.
    """
    op = _require_hermitian(n, tol, "conserved quantity")
    if not phi.is_channel(tol):
        raise ValueError("check_conservation requires a channel")
    if phi.in_dim != op.dim or phi.out_dim != op.dim:
        raise ValueError(
            f"quantity dimension {op.dim} does not match channel "
            f"({phi.out_dim}x{phi.in_dim})"
        )
    avg = op_norm(apply_dual(phi, op) - op)
    nsq = op @ op
    full = op_norm(apply_dual(phi, nsq) - nsq)
    average_holds = avg <= tol.eq_tol
    return ConservationReport(
        average_defect=float(avg),
        full_defect=float(full),
        average_holds=bool(average_holds),
        full_holds=bool(average_holds and full <= tol.eq_tol),
    )


@dataclasses.dataclass(frozen=True)
class UnitaryConservationReport:
    commutator_norm: float
    average_defect: float
    full_defect: float
    consistent: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def check_unitary_equivalence(
    u: Any, n: Any, tol: Tolerance = DEFAULT_TOL
) -> UnitaryConservationReport:
    """For unitary channels, ``[U, N] = 0``, average, and full conservation
    are one condition; report all three defects and whether they agree."""
    uop = u if isinstance(u, Operator) else Operator(u)
    if not uop.is_unitary(tol):
        raise ValueError("check_unitary_equivalence requires a unitary")
    nop = _require_hermitian(n, tol, "conserved quantity")
    if uop.dim != nop.dim:
        raise ValueError("dimension mismatch between unitary and quantity")
    comm = op_norm(commutator(uop, nop))
    report = check_conservation(OperationMap([uop]), nop, tol)
    flags = [comm <= tol.eq_tol, report.average_holds, report.full_holds]
    return UnitaryConservationReport(
        commutator_norm=float(comm),
        average_defect=report.average_defect,
        full_defect=report.full_defect,
        consistent=bool(all(flags) or not any(flags)),
    )


def _as_state(state: Any, tol: Tolerance) -> Operator:
    rho = state if isinstance(state, Operator) else Operator(state)
    if not rho.is_state(tol):
        raise ValueError("expected a density operator")
    return rho


def variance(n: Any, state: Any, tol: Tolerance = DEFAULT_TOL) -> float:
    nop = _require_hermitian(n, tol, "observable")
    rho = _as_state(state, tol)
    if nop.dim != rho.dim:
        raise ValueError("dimension mismatch between observable and state")
    m1 = float(np.real(np.trace(rho.mat @ nop.mat)))
    m2 = float(np.real(np.trace(rho.mat @ nop.mat @ nop.mat)))
    return max(m2 - m1 * m1, 0.0)


def qfi(n: Any, state: Any, tol: Tolerance = DEFAULT_TOL) -> float:
    """Quantum Fisher information of ``rho -> exp(-itN) rho exp(itN)``.

    Closed form ``2 sum_{i,j} (l_i - l_j)^2 / (l_i + l_j) |<i|N|j>|^2`` over
    eigenpairs of the state, skipping pairs with ``l_i + l_j <= rank_tol``.
    """
    nop = _require_hermitian(n, tol, "observable")
    rho = _as_state(state, tol)
    if nop.dim != rho.dim:
        raise ValueError("dimension mismatch between observable and state")
    w, v = np.linalg.eigh(rho.hermitian_part().mat)
    w = np.clip(w, 0.0, None)
    nmat = v.conj().T @ nop.mat @ v
    total = 0.0
    for i in range(len(w)):
        for j in range(len(w)):
            s = w[i] + w[j]
            if s <= tol.rank_tol:
                continue
            diff = w[i] - w[j]
            total += (diff * diff / s) * float(abs(nmat[i, j]) ** 2)
    return 2.0 * total


def conservative_unitary(
    n: Any,
    rng: np.random.Generator,
    strength: float = 1.0,
    tol: Tolerance = DEFAULT_TOL,
) -> Operator:
    """Random unitary commuting with ``n``.

    Samples a Hermitian generator block-diagonal in the eigenspaces of ``n``
    (eigenvalues clustered at ``rank_tol`` gaps) and exponentiates.
    """
    nop = _require_hermitian(n, tol, "conserved quantity")
    w, v = np.linalg.eigh(nop.hermitian_part().mat)
    d = nop.dim
    clusters: list[list[int]] = [[0]]
    for i in range(1, d):
        if w[i] - w[i - 1] <= tol.rank_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    h = np.zeros((d, d), dtype=complex)
    for idx in clusters:
        k = len(idx)
        z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        block = 0.5 * strength * (z + z.conj().T)
        rows = np.ix_(idx, idx)
        h[rows] = block
    h_full = v @ h @ v.conj().T
    return Operator(scipy.linalg.expm(1j * h_full))


@dataclasses.dataclass(frozen=True)
class YanaseReport:
    """Pointer-compatibility diagnostics for a scheme and quantity.

    ``yanase_defect`` is ``max_x ||[Z(x), N_A]||`` (pointer commutes with the
    apparatus part); ``weak_defect`` is ``max_x ||[Z^tau(x), N]||`` for the
    coupled pointer against the composite quantity.  For a unitary coupling
    that conserves ``N`` on average the two conditions are equivalent and the
    report records whether the computed defects agree.
    """

    yanase_defect: float
    weak_defect: float
    per_outcome_yanase: dict[str, float]
    per_outcome_weak: dict[str, float]
    unitary_coupling: bool
    average_conserving: bool
    equivalence_applicable: bool
    equivalence_consistent: bool | None
    defect_gap: float | None

    def to_dict(self) -> dict:
        return {
            "yanase_defect": self.yanase_defect,
            "weak_defect": self.weak_defect,
            "per_outcome_yanase": dict(self.per_outcome_yanase),
            "per_outcome_weak": dict(self.per_outcome_weak),
            "unitary_coupling": self.unitary_coupling,
            "average_conserving": self.average_conserving,
            "equivalence_applicable": self.equivalence_applicable,
            "equivalence_consistent": self.equivalence_consistent,
            "defect_gap": self.defect_gap,
        }


def yanase_conditions(
    m: MeasurementScheme, q: AdditiveQuantity, tol: Tolerance = DEFAULT_TOL
) -> YanaseReport:
    if q.n_sys.dim != m.sys_dim or q.n_app.dim != m.app_dim:
        raise ValueError("quantity dimensions do not match the scheme")
    n_comp = q.composite()
    per_y: dict[str, float] = {}
    for x, zx in m.pointer.items():
        per_y[x] = float(op_norm(commutator(zx, q.n_app)))
    coupled = heisenberg_pointer(m, tol)
    per_w: dict[str, float] = {}
    for x, zt in coupled.items():
        per_w[x] = float(op_norm(commutator(zt, n_comp)))
    yanase = max(per_y.values())
    weak = max(per_w.values())

    unitary = len(m.coupling.kraus) == 1 and Operator(m.coupling.kraus[0]).is_unitary(tol)
    avg_defect = op_norm(apply_dual(m.coupling, n_comp) - n_comp)
    average = avg_defect <= tol.eq_tol
    applicable = unitary and average
    consistent: bool | None = None
    gap: float | None = None
    if applicable:
        consistent = (yanase <= tol.eq_tol) == (weak <= tol.eq_tol)
        gap = float(abs(yanase - weak))
    return YanaseReport(
        yanase_defect=float(yanase),
        weak_defect=float(weak),
        per_outcome_yanase=per_y,
        per_outcome_weak=per_w,
        unitary_coupling=bool(unitary),
        average_conserving=bool(average),
        equivalence_applicable=bool(applicable),
        equivalence_consistent=consistent,
        defect_gap=gap,
    )
