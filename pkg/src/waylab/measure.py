"""Observables, instruments, and measurement schemes.

An :class:`Observable` is a finite POVM with ordered opaque string labels.
An :class:`Instrument` is an outcome-indexed family of trace-non-increasing
operations whose sum is a channel; its induced observable is
``x -> I*_x(1)``.  A :class:`MeasurementScheme` bundles an apparatus space,
an initial apparatus state ``xi``, a coupling channel on the composite, and a
pointer observable; :func:`scheme_to_instrument` realizes the measured
instrument ``I_x(t) = tr_A[(1 (x) Z(x)) E(t (x) xi)]`` in explicit Kraus
form, and :func:`restriction_maps` exposes the system/apparatus restrictions
used by the trade-off bounds.

Everything indexes composite spaces with the system slowest, matching
``opcore.tensor``.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Sequence

import numpy as np

from . import serialize
from .cpmaps import (
    OperationMap,
    apply_dual,
    apply_map,
    compose,
    dual_view,
    operation_from_json,
    operation_to_json,
)
from .opcore import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    eigenspace_projector,
    op_norm,
    op_norm_mat,
    partial_trace,
    psd_sqrt,
    tensor,
)

__all__ = [
    "Observable",
    "Instrument",
    "MeasurementScheme",
    "RestrictionMaps",
    "ItemCheck",
    "RepeatabilityReport",
    "sharp_observable",
    "luders_instrument",
    "collapse_instrument",
    "scheme_to_instrument",
    "measured_observable",
    "restriction_maps",
    "heisenberg_pointer",
    "normal_dilation",
    "repeatability_report",
    "observable_from_json",
    "observable_to_json",
    "instrument_from_json",
    "instrument_to_json",
    "scheme_from_json",
    "scheme_to_json",
]


class Observable:
    """POVM with ordered outcome labels.

    Effects must be valid (Hermitian, spectrum in [0, 1]) and sum to the
    identity within ``eq_tol``.  Labels are opaque strings; declaration order
    is preserved everywhere, including reports.
    """

    __slots__ = ("_outcomes", "_effects", "dim")

    def __init__(
        self,
        outcomes: Sequence[str],
        effects: Sequence[Any],
        tol: Tolerance = DEFAULT_TOL,
        validate: bool = True,
    ):
        labels = tuple(str(x) for x in outcomes)
        ops = tuple(e if isinstance(e, Operator) else Operator(e) for e in effects)
        if len(labels) != len(ops):
            raise ValueError(f"{len(labels)} outcomes but {len(ops)} effects")
        if not ops:
            raise ValueError("observable needs at least one outcome")
        if len(set(labels)) != len(labels):
            raise ValueError("outcome labels must be distinct")
        d = ops[0].dim
        for e in ops:
            if e.dim != d:
                raise ValueError("effects must share one dimension")
        if validate:
            for x, e in zip(labels, ops):
                if not e.is_effect(tol):
                    w = np.linalg.eigvalsh(e.hermitian_part().mat)
                    raise ValueError(
                        f"effect {x!r} is not a valid effect "
                        f"(spectrum [{w.min():.3e}, {w.max():.3e}])"
                    )
            total = sum(e.mat for e in ops)
            gap = op_norm_mat(total - np.eye(d))
            if gap > tol.eq_tol:
                raise ValueError(f"effects do not sum to the identity (defect {gap:.3e})")
        self._outcomes = labels
        self._effects = ops
        self.dim = d

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self._outcomes

    @property
    def effects(self) -> tuple[Operator, ...]:
        return self._effects

    def effect(self, x: str) -> Operator:
        try:
            return self._effects[self._outcomes.index(str(x))]
        except ValueError:
            raise KeyError(f"unknown outcome {x!r}") from None

    def __len__(self) -> int:
        return len(self._outcomes)

    def __repr__(self) -> str:
        return f"Observable(dim={self.dim}, outcomes={list(self._outcomes)!r})"

    def items(self):
        return zip(self._outcomes, self._effects)

    # -- predicates ------------------------------------------------------

    def is_sharp(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        """All effects are projections and mutually orthogonal."""
        for e in self._effects:
            if not e.is_projection(tol):
                return False
        for i in range(len(self._effects)):
            for j in range(i + 1, len(self._effects)):
                if op_norm_mat(self._effects[i].mat @ self._effects[j].mat) > tol.eq_tol:
                    return False
        return True

    def is_commutative(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        for i in range(len(self._effects)):
            for j in range(i + 1, len(self._effects)):
                a, b = self._effects[i].mat, self._effects[j].mat
                if op_norm_mat(a @ b - b @ a) > tol.eq_tol:
                    return False
        return True

    def is_norm_one(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        """Every nonzero effect attains operator norm 1 (within rank_tol)."""
        for e in self._effects:
            n = op_norm(e)
            if n > tol.rank_tol and abs(n - 1.0) > tol.rank_tol:
                return False
        return True

    def is_rank_one(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        for e in self._effects:
            s = np.linalg.svd(e.mat, compute_uv=False)
            if int(np.sum(s > tol.rank_tol)) > 1:
                return False
        return True

    def is_trivial(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        """Every effect is a multiple of the identity."""
        d = self.dim
        for e in self._effects:
            c = np.trace(e.mat) / d
            if op_norm_mat(e.mat - c * np.eye(d)) > tol.eq_tol:
                return False
        return True


class Instrument:
    """Outcome-indexed operations summing to a channel."""

    __slots__ = ("_outcomes", "_operations", "dim")

    def __init__(
        self,
        outcomes: Sequence[str],
        operations: Sequence[OperationMap],
        tol: Tolerance = DEFAULT_TOL,
        validate: bool = True,
    ):
        labels = tuple(str(x) for x in outcomes)
        ops = tuple(operations)
        if len(labels) != len(ops):
            raise ValueError(f"{len(labels)} outcomes but {len(ops)} operations")
        if not ops:
            raise ValueError("instrument needs at least one outcome")
        if len(set(labels)) != len(labels):
            raise ValueError("outcome labels must be distinct")
        d = ops[0].in_dim
        for op in ops:
            if op.in_dim != d or op.out_dim != d:
                raise ValueError("instrument operations must be endomorphisms of one space")
        if validate:
            for x, op in zip(labels, ops):
                if not op.is_operation(tol):
                    raise ValueError(f"operation {x!r} is not trace non-increasing")
            gram = sum(op.kraus_gram() for op in ops)
            gap = op_norm_mat(gram - np.eye(d))
            if gap > tol.eq_tol:
                raise ValueError(f"total map is not a channel (completeness defect {gap:.3e})")
        self._outcomes = labels
        self._operations = ops
        self.dim = d

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self._outcomes

    @property
    def operations(self) -> tuple[OperationMap, ...]:
        return self._operations

    def operation(self, x: str) -> OperationMap:
        try:
            return self._operations[self._outcomes.index(str(x))]
        except ValueError:
            raise KeyError(f"unknown outcome {x!r}") from None

    def __repr__(self) -> str:
        return f"Instrument(dim={self.dim}, outcomes={list(self._outcomes)!r})"

    def total(self) -> OperationMap:
        """The measurement channel ``I_X = sum_x I_x``."""
        ks: list[np.ndarray] = []
        for op in self._operations:
            ks.extend(op.kraus)
        return OperationMap(ks)

    def apply(self, x: str, t: Any) -> Operator:
        return apply_map(self.operation(x), t)

    def apply_dual(self, x: str, a: Any) -> Operator:
        return apply_dual(self.operation(x), a)

    def apply_dual_total(self, a: Any) -> Operator:
        acc = Operator.zero(self.dim)
        for op in self._operations:
            acc = acc + apply_dual(op, a)
        return acc

    def induced_observable(self, tol: Tolerance = DEFAULT_TOL) -> Observable:
        """``x -> I*_x(1)``, validated as an observable."""
        eye = np.eye(self.dim)
        effs = [apply_dual(op, eye).hermitian_part() for op in self._operations]
        return Observable(self._outcomes, effs, tol)


class MeasurementScheme:
    """Apparatus state + coupling channel + pointer observable."""

    __slots__ = ("sys_dim", "app_dim", "xi", "coupling", "pointer")

    def __init__(
        self,
        sys_dim: int,
        app_dim: int,
        xi: Any,
        coupling: OperationMap,
        pointer: Observable,
        tol: Tolerance = DEFAULT_TOL,
        validate: bool = True,
    ):
        self.sys_dim = int(sys_dim)
        self.app_dim = int(app_dim)
        self.xi = xi if isinstance(xi, Operator) else Operator(xi)
        self.coupling = coupling
        self.pointer = pointer
        if validate:
            if self.sys_dim < 1 or self.app_dim < 1:
                raise ValueError("dimensions must be positive")
            if self.xi.dim != self.app_dim:
                raise ValueError(
                    f"xi dimension {self.xi.dim} does not match apparatus dim {self.app_dim}"
                )
            if not self.xi.is_state(tol):
                raise ValueError("xi must be a density operator")
            d = self.sys_dim * self.app_dim
            if coupling.in_dim != d or coupling.out_dim != d:
                raise ValueError(
                    f"coupling must act on the {d}-dimensional composite, "
                    f"got {coupling.out_dim}x{coupling.in_dim}"
                )
            if not coupling.is_channel(tol):
                raise ValueError("coupling must be a channel")
            if pointer.dim != self.app_dim:
                raise ValueError(
                    f"pointer dimension {pointer.dim} does not match apparatus dim "
                    f"{self.app_dim}"
                )

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self.pointer.outcomes

    def __repr__(self) -> str:
        return (
            f"MeasurementScheme(sys_dim={self.sys_dim}, app_dim={self.app_dim}, "
            f"outcomes={list(self.pointer.outcomes)!r})"
        )


@dataclasses.dataclass(frozen=True)
class RestrictionMaps:
    """System/apparatus restrictions of a scheme.

    ``gamma_xi``:   B on S(x)A  ->  tr_A[B (1 (x) xi)]          (system side)
    ``gamma_xi_e``: B on S(x)A  ->  gamma_xi(E*(B))             (after coupling)
    ``conj_channel``: t on S    ->  tr_S[E(t (x) xi)]           (apparatus side)
    ``conj_dual``:  its dual on apparatus observables.

    All four are Kraus views whose ``apply`` is the stated map; the
    Heisenberg-side views need not be trace non-increasing.
    """

    gamma_xi: OperationMap
    gamma_xi_e: OperationMap
    conj_channel: OperationMap
    conj_dual: OperationMap


def sharp_observable(a: Any, tol: Tolerance = DEFAULT_TOL) -> Observable:
    """Spectral observable of a Hermitian operator.

    Eigenvalues are clustered by ``rank_tol`` gaps; outcomes are labelled
    ``e0, e1, ...`` in ascending eigenvalue order.
    """
    op = a if isinstance(a, Operator) else Operator(a)
    if not op.is_hermitian(tol):
        raise ValueError("sharp_observable requires a Hermitian operator")
    w, v = np.linalg.eigh(op.hermitian_part().mat)
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= tol.rank_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    labels = [f"e{k}" for k in range(len(clusters))]
    effects = []
    for idx in clusters:
        cols = v[:, idx]
        effects.append(Operator(cols @ cols.conj().T))
    return Observable(labels, effects, tol)


def luders_instrument(e: Observable, tol: Tolerance = DEFAULT_TOL) -> Instrument:
    """``I_x(t) = sqrt(E(x)) t sqrt(E(x))``."""
    ops = [OperationMap([psd_sqrt(eff, tol)]) for eff in e.effects]
    return Instrument(e.outcomes, ops, tol)


def collapse_instrument(
    e: Observable, vectors: Sequence[Any], tol: Tolerance = DEFAULT_TOL
) -> Instrument:
    """``I_x(t) = tr[E(x) t] |psi_x><psi_x|`` for unit vectors ``psi_x``."""
    if len(vectors) != len(e.outcomes):
        raise ValueError("need one collapse vector per outcome")
    d = e.dim
    ops = []
    for eff, v in zip(e.effects, vectors):
        psi = np.asarray(v, dtype=complex).reshape(-1)
        if psi.shape != (d,):
            raise ValueError(f"collapse vector has length {psi.shape[0]}, expected {d}")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > tol.eq_tol:
            raise ValueError(f"collapse vector is not normalized (norm {norm:.6f})")
        sq = psd_sqrt(eff, tol).mat
        ops.append(OperationMap([np.outer(psi, sq[k, :]) for k in range(d)]))
    return Instrument(e.outcomes, ops, tol)


def _xi_decomposition(xi: Operator, tol: Tolerance) -> list[np.ndarray]:
    """Weighted spectral vectors ``sqrt(q_i) phi_i`` with ``q_i > rank_tol``."""
    w, v = np.linalg.eigh(xi.hermitian_part().mat)
    vs = []
    for i in range(len(w) - 1, -1, -1):
        if w[i] > tol.rank_tol:
            vs.append(np.sqrt(w[i]) * v[:, i])
    if not vs:
        raise ValueError("xi has no spectral weight above rank_tol")
    return vs


def scheme_to_instrument(m: MeasurementScheme, tol: Tolerance = DEFAULT_TOL) -> Instrument:
    """Explicit Kraus form of ``I_x(t) = tr_A[(1 (x) Z(x)) E(t (x) xi)]``.

    Kraus factors combine the coupling's Kraus operators, the spectral
    vectors of ``xi``, square roots of the pointer effects, and a contraction
    over the apparatus basis.
    """
    dS, dA = m.sys_dim, m.app_dim
    weighted = _xi_decomposition(m.xi, tol)
    eye_s = np.eye(dS)
    ops = []
    for zx in m.pointer.effects:
        sqz = psd_sqrt(zx, tol).mat
        lift = np.kron(eye_s, sqz)
        kraus_x: list[np.ndarray] = []
        for L in m.coupling.kraus:
            b4 = (lift @ L).reshape(dS, dA, dS, dA)
            for phi in weighted:
                c = np.einsum("pasb,b->pas", b4, phi)
                for a in range(dA):
                    kraus_x.append(np.ascontiguousarray(c[:, a, :]))
        ops.append(OperationMap(kraus_x))
    return Instrument(m.pointer.outcomes, ops, tol)


def measured_observable(m: MeasurementScheme, tol: Tolerance = DEFAULT_TOL) -> Observable:
    """Effects ``Gamma_xi(E*(1 (x) Z(x)))`` of the scheme."""
    dS, dA = m.sys_dim, m.app_dim
    eye_s = np.eye(dS)
    one_xi = np.kron(eye_s, m.xi.mat)
    effs = []
    for zx in m.pointer.effects:
        heis = apply_dual(m.coupling, tensor(eye_s, zx)).mat
        eff = partial_trace(heis @ one_xi, keep=0, dims=(dS, dA))
        effs.append(eff.hermitian_part())
    return Observable(m.pointer.outcomes, effs, tol)


def restriction_maps(m: MeasurementScheme, tol: Tolerance = DEFAULT_TOL) -> RestrictionMaps:
    dS, dA = m.sys_dim, m.app_dim
    eye_s = np.eye(dS)
    sqxi = psd_sqrt(m.xi, tol).mat
    gamma = OperationMap(
        [np.kron(eye_s, sqxi[a, :].reshape(1, dA)) for a in range(dA)]
    )
    gamma_e = compose(gamma, dual_view(m.coupling))
    weighted = _xi_decomposition(m.xi, tol)
    conj_kraus: list[np.ndarray] = []
    for L in m.coupling.kraus:
        for phi in weighted:
            v = L @ np.kron(eye_s, phi.reshape(dA, 1))
            for s in range(dS):
                conj_kraus.append(v[s * dA : (s + 1) * dA, :])
    conj = OperationMap(conj_kraus)
    return RestrictionMaps(
        gamma_xi=gamma,
        gamma_xi_e=gamma_e,
        conj_channel=conj,
        conj_dual=dual_view(conj),
    )


def heisenberg_pointer(m: MeasurementScheme, tol: Tolerance = DEFAULT_TOL) -> Observable:
    """Coupled pointer ``Z^tau(x) = E*(1 (x) Z(x))`` on the composite."""
    eye_s = np.eye(m.sys_dim)
    effs = [
        apply_dual(m.coupling, tensor(eye_s, zx)).hermitian_part()
        for zx in m.pointer.effects
    ]
    return Observable(m.pointer.outcomes, effs, tol)


def normal_dilation(e: Observable, tol: Tolerance = DEFAULT_TOL) -> MeasurementScheme:
    """Unitary scheme whose instrument is the Lüders instrument of ``e``.

    The apparatus has one dimension per outcome, starts in ``|0><0|``, and
    the coupling extends ``psi (x) |0> -> sum_x sqrt(E(x)) psi (x) |x>`` to a
    unitary by Gram-Schmidt over the standard basis, skipping near-dependent
    vectors at ``rank_tol``.
    """
    dS, n = e.dim, len(e.outcomes)
    dim = dS * n
    u = np.zeros((dim, dim), dtype=complex)
    sqrts = [psd_sqrt(eff, tol).mat for eff in e.effects]
    for s in range(dS):
        col = np.zeros(dim, dtype=complex)
        for x in range(n):
            for sp in range(dS):
                col[sp * n + x] = sqrts[x][sp, s]
        u[:, s * n] = col
    open_slots = [s * n + x for s in range(dS) for x in range(1, n)]
    chosen = [u[:, s * n] for s in range(dS)]
    slot_iter = iter(open_slots)
    for idx in range(dim):
        if len(chosen) == dim:
            break
        v = np.zeros(dim, dtype=complex)
        v[idx] = 1.0
        for c in chosen:
            v = v - np.vdot(c, v) * c
        norm = np.linalg.norm(v)
        if norm > tol.rank_tol:
            v = v / norm
            u[:, next(slot_iter)] = v
            chosen.append(v)
    if len(chosen) != dim:
        raise RuntimeError("failed to complete the dilation isometry to a unitary")
    xi = np.zeros((n, n), dtype=complex)
    xi[0, 0] = 1.0
    pointer_effects = []
    for x in range(n):
        p = np.zeros((n, n), dtype=complex)
        p[x, x] = 1.0
        pointer_effects.append(Operator(p))
    pointer = Observable(e.outcomes, pointer_effects, tol)
    return MeasurementScheme(dS, n, Operator(xi), OperationMap([u]), pointer, tol)


# ---------------------------------------------------------------------------
# repeatability / first-kindness diagnostics
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ItemCheck:
    defect: float
    passed: bool
    evaluated: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class RepeatabilityReport:
    outcomes: tuple[str, ...]
    repeatable: bool
    repeatability_defect: float
    per_outcome_defects: dict[str, float]
    first_kind: bool
    first_kind_defect: float
    sharp_equivalence_ok: bool | None
    items: dict[str, ItemCheck]
    items_applicable: bool

    def to_dict(self) -> dict:
        return {
            "outcomes": list(self.outcomes),
            "repeatable": self.repeatable,
            "repeatability_defect": self.repeatability_defect,
            "per_outcome_defects": dict(self.per_outcome_defects),
            "first_kind": self.first_kind,
            "first_kind_defect": self.first_kind_defect,
            "sharp_equivalence_ok": self.sharp_equivalence_ok,
            "items": {k: v.to_dict() for k, v in self.items.items()},
            "items_applicable": self.items_applicable,
        }


def _matrix_units(d: int) -> list[np.ndarray]:
    units = []
    for i in range(d):
        for j in range(d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = 1.0
            units.append(m)
    return units


def repeatability_report(
    inst: Instrument,
    m: MeasurementScheme | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> RepeatabilityReport:
    """Repeatability and first-kindness diagnostics for an instrument.

    The headline ``repeatability_defect`` is ``||1 - sum_x I*_x(E(x))||``,
    the worst-case probability that an immediate second run disagrees with
    the first; it vanishes exactly when ``I*_x(E(x)) = E(x)`` for every
    outcome because each gap ``E(x) - I*_x(E(x))`` is positive.  Per-outcome
    gaps are reported alongside.  The structural identities that repeatable
    instruments must satisfy are evaluated on the matrix-unit basis; the
    three identities that involve the apparatus need ``m`` and are marked
    unevaluated otherwise.  Output distinguishability is probed on the
    maximally mixed state and three fixed-seed random states so reports stay
    deterministic.
    """
    d = inst.dim
    e_obs = inst.induced_observable(tol)
    eye = np.eye(d)

    per_outcome: dict[str, float] = {}
    gap_sum = np.zeros((d, d), dtype=complex)
    for x, eff in e_obs.items():
        back = inst.apply_dual(x, eff).mat
        per_outcome[x] = op_norm_mat(back - eff.mat)
        gap_sum += eff.mat - back
    repeat_defect = op_norm_mat(gap_sum)
    repeatable = repeat_defect <= tol.eq_tol

    fk_defect = 0.0
    for x, eff in e_obs.items():
        fk_defect = max(fk_defect, op_norm_mat(inst.apply_dual_total(eff).mat - eff.mat))
    first_kind = fk_defect <= tol.eq_tol

    sharp_flag: bool | None = None
    if e_obs.is_sharp(tol):
        sharp_flag = repeatable == first_kind

    units = _matrix_units(d)
    items: dict[str, ItemCheck] = {}

    # (i) I*_x(A) = I*_x(E(x) A) = I*_x(A E(x)) = I*_x(E(x) A E(x))
    worst = 0.0
    for x, eff in e_obs.items():
        em = eff.mat
        for a in units:
            base = inst.apply_dual(x, a).mat
            for probe in (em @ a, a @ em, em @ a @ em):
                worst = max(worst, op_norm_mat(inst.apply_dual(x, probe).mat - base))
    items["sandwich-own-effect"] = ItemCheck(worst, worst <= tol.eq_tol)

    # (ii) the total dual agrees with the single-outcome dual on E(x)-framed forms
    worst = 0.0
    for x, eff in e_obs.items():
        em = eff.mat
        for a in units:
            for probe in (em @ a, a @ em, em @ a @ em):
                total_img = inst.apply_dual_total(probe).mat
                own_img = inst.apply_dual(x, probe).mat
                worst = max(worst, op_norm_mat(total_img - own_img))
    items["total-localizes"] = ItemCheck(worst, worst <= tol.eq_tol)

    # (iv)/(v): eigenvalue-1 projectors of the effects and their exclusivity
    proj: dict[str, Operator] = {}
    norm_gap = 0.0
    missing = []
    for x, eff in e_obs.items():
        n = op_norm(eff)
        if n <= tol.rank_tol:
            continue
        norm_gap = max(norm_gap, abs(1.0 - n))
        p = eigenspace_projector(eff, 1.0, tol)
        if op_norm(p) <= tol.rank_tol:
            missing.append(x)
        else:
            proj[x] = p
    items["norm-one-projectors"] = ItemCheck(
        norm_gap,
        norm_gap <= tol.rank_tol and not missing,
        note=("missing eigenvalue-1 eigenspace for: " + ", ".join(missing)) if missing else "",
    )

    worst = 0.0
    for x, p in proj.items():
        for y, eff in e_obs.items():
            prod = p.mat @ eff.mat
            worst = max(
                worst,
                op_norm_mat(prod - p.mat) if x == y else op_norm_mat(prod),
            )
    items["projector-exclusivity"] = ItemCheck(worst, worst <= tol.eq_tol)

    # (vi) I*_x(A) = I*_x(P(x) A P(x))
    worst = 0.0
    evaluated_vi = bool(proj)
    for x, p in proj.items():
        pm = p.mat
        for a in units:
            base = inst.apply_dual(x, a).mat
            worst = max(worst, op_norm_mat(inst.apply_dual(x, pm @ a @ pm).mat - base))
    items["projector-sandwich"] = ItemCheck(
        worst, worst <= tol.eq_tol, evaluated=evaluated_vi,
        note="" if evaluated_vi else "no eigenvalue-1 projectors available",
    )

    # output distinguishability: normalized outputs for different outcomes
    # are orthogonal (rho_x rho_y = 0)
    rng = np.random.default_rng(171)
    probes = [Operator(eye / d)]
    for _ in range(3):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        rho = g @ g.conj().T
        probes.append(Operator(rho / np.trace(rho)))
    worst = 0.0
    for rho in probes:
        outs = []
        for x in inst.outcomes:
            out = inst.apply(x, rho).mat
            p = float(np.real(np.trace(out)))
            if p > tol.rank_tol:
                outs.append(out / p)
        for i in range(len(outs)):
            for j in range(i + 1, len(outs)):
                worst = max(worst, op_norm_mat(outs[i] @ outs[j]))
    items["output-orthogonality"] = ItemCheck(worst, worst <= tol.eq_tol)

    if m is not None:
        maps = restriction_maps(m, tol)
        pointer = m.pointer
        dA = m.app_dim
        eye_a = np.eye(dA)

        # (iii) E(x) = Gamma^E_xi(E(x)^n (x) 1) = Gamma^E_xi(1 (x) Z(x)^n)
        worst = 0.0
        for x, eff in e_obs.items():
            em = eff.mat
            zm = pointer.effect(x).mat
            for n_pow in (1, 2, 3):
                sys_side = apply_map(
                    maps.gamma_xi_e, np.kron(np.linalg.matrix_power(em, n_pow), eye_a)
                ).mat
                app_side = apply_map(
                    maps.gamma_xi_e, np.kron(eye, np.linalg.matrix_power(zm, n_pow))
                ).mat
                worst = max(worst, op_norm_mat(sys_side - em), op_norm_mat(app_side - em))
        items["moment-identities"] = ItemCheck(worst, worst <= tol.eq_tol)

        # pointer-side eigenvalue-1 projectors
        qproj: dict[str, Operator] = {}
        q_missing = []
        q_gap = 0.0
        for x, zx in pointer.items():
            n = op_norm(zx)
            if n <= tol.rank_tol:
                continue
            q_gap = max(q_gap, abs(1.0 - n))
            q = eigenspace_projector(zx, 1.0, tol)
            if op_norm(q) <= tol.rank_tol:
                q_missing.append(x)
            else:
                qproj[x] = q
        worst = q_gap
        for x, q in qproj.items():
            for y, zy in pointer.items():
                prod = q.mat @ zy.mat
                worst = max(
                    worst,
                    op_norm_mat(prod - q.mat) if x == y else op_norm_mat(prod),
                )
        items["pointer-projectors"] = ItemCheck(
            worst,
            worst <= tol.eq_tol and not q_missing,
            note=("missing pointer eigenspace for: " + ", ".join(q_missing))
            if q_missing
            else "",
        )

        if qproj and not q_missing:
            q_total = sum(q.mat for q in qproj.values())
            # (vii) the apparatus restriction only sees the pointer support
            worst = 0.0
            for b in _matrix_units(dA):
                base = apply_dual(maps.conj_channel, b).mat
                sand = apply_dual(maps.conj_channel, q_total @ b @ q_total).mat
                worst = max(worst, op_norm_mat(sand - base))
            items["conjugate-pointer-support"] = ItemCheck(worst, worst <= tol.eq_tol)

            # (viii) I*_x(A) = Gamma^E_xi(A (x) Q(x))
            worst = 0.0
            for x in inst.outcomes:
                if x not in qproj:
                    continue
                qm = qproj[x].mat
                for a in units:
                    lhs_img = inst.apply_dual(x, a).mat
                    rhs_img = apply_map(maps.gamma_xi_e, np.kron(a, qm)).mat
                    worst = max(worst, op_norm_mat(rhs_img - lhs_img))
            items["restriction-identity"] = ItemCheck(worst, worst <= tol.eq_tol)
        else:
            note = "pointer effects do not attain norm one"
            items["conjugate-pointer-support"] = ItemCheck(0.0, False, evaluated=False, note=note)
            items["restriction-identity"] = ItemCheck(0.0, False, evaluated=False, note=note)
    else:
        note = "requires a measurement scheme"
        for key in ("moment-identities", "pointer-projectors",
                    "conjugate-pointer-support", "restriction-identity"):
            items[key] = ItemCheck(0.0, False, evaluated=False, note=note)

    return RepeatabilityReport(
        outcomes=inst.outcomes,
        repeatable=bool(repeatable),
        repeatability_defect=float(repeat_defect),
        per_outcome_defects=per_outcome,
        first_kind=bool(first_kind),
        first_kind_defect=float(fk_defect),
        sharp_equivalence_ok=sharp_flag,
        items=items,
        items_applicable=bool(repeatable),
    )


# ---------------------------------------------------------------------------
# JSON descriptors
# ---------------------------------------------------------------------------


def observable_from_json(obj: Any, where: str = "observable",
                         tol: Tolerance = DEFAULT_TOL) -> Observable:
    if not isinstance(obj, dict):
        raise serialize.SchemaError(f"{where}: expected an object")
    outcomes = obj.get("outcomes")
    effects = obj.get("effects")
    if not isinstance(outcomes, list) or not outcomes:
        raise serialize.SchemaError(f"{where}.outcomes: expected a non-empty list")
    if not isinstance(effects, list) or len(effects) != len(outcomes):
        raise serialize.SchemaError(
            f"{where}.effects: expected one effect per outcome"
        )
    mats = [
        serialize.matrix_from_json(m, f"{where}.effects[{i}]") for i, m in enumerate(effects)
    ]
    try:
        return Observable([str(x) for x in outcomes], mats, tol)
    except ValueError as exc:
        raise serialize.SchemaError(f"{where}: {exc}") from exc


def observable_to_json(obs: Observable) -> dict:
    return {
        "outcomes": list(obs.outcomes),
        "effects": [serialize.matrix_to_json(e.mat) for e in obs.effects],
    }


def instrument_from_json(obj: Any, where: str = "instrument",
                         tol: Tolerance = DEFAULT_TOL) -> Instrument:
    if not isinstance(obj, dict):
        raise serialize.SchemaError(f"{where}: expected an object")
    outcomes = obj.get("outcomes")
    operations = obj.get("operations")
    if not isinstance(outcomes, list) or not outcomes:
        raise serialize.SchemaError(f"{where}.outcomes: expected a non-empty list")
    if not isinstance(operations, list) or len(operations) != len(outcomes):
        raise serialize.SchemaError(f"{where}.operations: expected one operation per outcome")
    ops = [
        operation_from_json(o, f"{where}.operations[{i}]") for i, o in enumerate(operations)
    ]
    try:
        return Instrument([str(x) for x in outcomes], ops, tol)
    except ValueError as exc:
        raise serialize.SchemaError(f"{where}: {exc}") from exc


def instrument_to_json(inst: Instrument) -> dict:
    return {
        "outcomes": list(inst.outcomes),
        "operations": [operation_to_json(op) for op in inst.operations],
    }


def scheme_from_json(obj: Any, sys_dim: int, where: str = "scheme",
                     tol: Tolerance = DEFAULT_TOL) -> MeasurementScheme:
    if not isinstance(obj, dict):
        raise serialize.SchemaError(f"{where}: expected an object")
    app_dim = obj.get("apparatus_dim")
    if not isinstance(app_dim, int) or app_dim < 1:
        raise serialize.SchemaError(f"{where}.apparatus_dim: expected a positive integer")
    xi = serialize.matrix_from_json(obj.get("xi"), f"{where}.xi")
    coupling = operation_from_json(obj.get("coupling"), f"{where}.coupling")
    pointer = observable_from_json(obj.get("pointer"), f"{where}.pointer", tol)
    try:
        return MeasurementScheme(sys_dim, app_dim, xi, coupling, pointer, tol)
    except ValueError as exc:
        raise serialize.SchemaError(f"{where}: {exc}") from exc


def scheme_to_json(m: MeasurementScheme) -> dict:
    return {
        "apparatus_dim": m.app_dim,
        "xi": serialize.matrix_to_json(m.xi.mat),
        "coupling": operation_to_json(m.coupling),
        "pointer": observable_to_json(m.pointer),
    }
