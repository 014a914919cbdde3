"""Fixed-point structure of measurement channels.

For a channel ``Phi`` on a ``d``-dimensional system the dual fixed space
``F(Phi*) = {A : Phi*(A) = A}`` is computed from the null spaces of
``M - 1`` where ``M`` is the dual supermatrix.  The spectral projector
``Pi = R (L R)^{-1} L`` onto that eigenspace realizes the Cesàro average
``Phi*_av`` exactly; its adjoint acts on states, giving the reference fixed
state ``rho0 = Phi_av(1/d)`` whose support projection ``P`` carries the
structure theory: compressed to ``P H`` the fixed space is an algebra, and
the analysis certifies multiplicative closure numerically.

On top of the analysis sit three consumers: necessary commutation conditions
for nondisturbance/first-kindness/repeatability in the presence of an
additive conserved quantity, extraction of a norm-1 observable from any
nondisturbed nontrivial one, and the classical post-processing
decomposition of first-kind instruments.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Sequence

import numpy as np

from .conserve import AdditiveQuantity, check_conservation
from .cpmaps import (
    OperationMap,
    SuperMatrix,
    apply_dual,
    apply_map,
    to_supermatrix,
    unvec,
    vec,
)
from .measure import (
    Instrument,
    MeasurementScheme,
    Observable,
    luders_instrument,
    measured_observable,
    scheme_to_instrument,
)
from .opcore import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    commutator,
    eigenspace_projector,
    hermitian_basis,
    op_norm,
    op_norm_mat,
)

__all__ = [
    "FixedPointAnalysis",
    "MinimalSupportReport",
    "ConditionCheck",
    "StructuralReport",
    "Norm1Result",
    "PostProcessingResult",
    "analyze_fixed_points",
    "check_minimal_support",
    "structural_necessary_conditions",
    "nondisturbed_norm1_observable",
    "post_processing_decomposition",
    "cesaro_supermatrix",
    "kraus_commutant",
]

_JOINT_DIAG_SEED = 1717


@dataclasses.dataclass(frozen=True)
class FixedPointAnalysis:
    """Certified fixed-point data of a channel's dual."""

    dim: int
    fixed_dim: int
    basis: tuple[Operator, ...]
    projector: SuperMatrix
    rho0: Operator
    support_p: Operator
    p_isometry: np.ndarray
    faithful: bool
    restricted_basis: tuple[np.ndarray, ...]
    algebra_certified: bool
    max_fixed_defect: float
    commutant_consistent: bool | None

    def average_dual(self, a: Any) -> Operator:
        """Cesàro-averaged dual action ``Phi*_av(a)`` via the projector."""
        m = a.mat if isinstance(a, Operator) else np.asarray(a, dtype=complex)
        return Operator(unvec(self.projector.m @ vec(m), self.dim))

    def average_state(self, t: Any) -> Operator:
        """State-side Cesàro average ``Phi_av(t)``."""
        m = t.mat if isinstance(t, Operator) else np.asarray(t, dtype=complex)
        return Operator(unvec(self.projector.m.conj().T @ vec(m), self.dim))

    def compress(self, a: Any) -> np.ndarray:
        """``W^dag a W``: the P-block of an operator."""
        m = a.mat if isinstance(a, Operator) else np.asarray(a, dtype=complex)
        w = self.p_isometry
        return w.conj().T @ m @ w

    def embed(self, b: np.ndarray) -> np.ndarray:
        """``W b W^dag``: extend a P-block operator by zero."""
        w = self.p_isometry
        return w @ np.asarray(b, dtype=complex) @ w.conj().T

    def to_dict(self) -> dict:
        from . import serialize

        return {
            "fixed_dim": self.fixed_dim,
            "faithful": self.faithful,
            "algebra_certified": self.algebra_certified,
            "max_fixed_defect": self.max_fixed_defect,
            "commutant_consistent": self.commutant_consistent,
            "support_rank": int(self.p_isometry.shape[1]),
            "P": serialize.matrix_to_json(self.support_p.mat),
            "rho0": serialize.matrix_to_json(self.rho0.mat),
            "basis": [serialize.matrix_to_json(b.mat) for b in self.basis],
        }


def _null_spaces(a: np.ndarray, rank_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal right and left null bases of a square matrix."""
    u, s, vh = np.linalg.svd(a)
    n_null = int(np.sum(s <= rank_tol))
    if n_null == 0:
        raise ValueError("matrix has no null space at the requested tolerance")
    right = vh[-n_null:, :].conj().T
    left = u[:, -n_null:]
    return right, left


def kraus_commutant(phi: OperationMap, rank_tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal vec-basis of ``{K_i, K_i^dag}'`` via one stacked null space."""
    d = phi.in_dim
    if phi.out_dim != d:
        raise ValueError("commutant needs an endomorphism")
    eye = np.eye(d)
    blocks = []
    for k in phi.kraus:
        for mat in (k, k.conj().T):
            blocks.append(np.kron(mat.T, eye) - np.kron(eye, mat))
    stacked = np.vstack(blocks)
    _, s, vh = np.linalg.svd(stacked)
    n_null = int(np.sum(s <= rank_tol * max(1.0, float(s[0]))))
    if n_null == 0:
        return np.zeros((d * d, 0), dtype=complex)
    return vh[-n_null:, :].conj().T


def analyze_fixed_points(
    phi: OperationMap, tol: Tolerance = DEFAULT_TOL
) -> FixedPointAnalysis:
    """Fixed-point space, Cesàro projector, support, and algebra certificate.

    Raises if ``phi`` is not a channel, or if the eigenvalue-1 spectral data
    are numerically defective (the left/right null pairing ``L R`` fails to
    invert at ``rank_tol``), which would make the projector meaningless.
    """
    if phi.in_dim != phi.out_dim:
        raise ValueError("fixed-point analysis needs an endomorphism")
    if not phi.is_channel(tol):
        raise ValueError("fixed-point analysis requires a channel")
    d = phi.in_dim
    m_dual = to_supermatrix(phi).m
    gap = m_dual - np.eye(d * d)
    right, left = _null_spaces(gap, tol.rank_tol)
    r = right.shape[1]
    if left.shape[1] != r:
        raise ValueError(
            f"left/right fixed-space dimensions disagree ({left.shape[1]} vs {r}); "
            "the eigenvalue-1 spectral data are numerically ambiguous"
        )
    lr = left.conj().T @ right
    smin = float(np.linalg.svd(lr, compute_uv=False).min())
    if smin <= tol.rank_tol:
        raise ValueError(
            f"eigenvalue-1 eigenspace is numerically defective "
            f"(pairing matrix smallest singular value {smin:.3e} at fixed dim {r}); "
            "cannot build the spectral projector"
        )
    proj = right @ np.linalg.solve(lr, left.conj().T)
    projector = SuperMatrix(m=proj, in_dim=d, out_dim=d)

    herm = hermitian_basis([unvec(right[:, i], d) for i in range(r)], tol.rank_tol)
    if len(herm) != r:
        raise ValueError(
            f"failed to build a Hermitian basis of the fixed space "
            f"({len(herm)} of {r} directions); the space is not adjoint-closed numerically"
        )
    basis = tuple(Operator(b) for b in herm)
    max_defect = 0.0
    for b in basis:
        max_defect = max(max_defect, op_norm(apply_dual(phi, b) - b))

    rho0_raw = unvec(proj.conj().T @ vec(np.eye(d) / d), d)
    rho0 = Operator(0.5 * (rho0_raw + rho0_raw.conj().T))
    w, v = np.linalg.eigh(rho0.mat)
    mask = w > tol.rank_tol
    w_iso = v[:, mask]
    support = Operator(w_iso @ w_iso.conj().T)
    rp = int(mask.sum())
    faithful = rp == d

    compressed = hermitian_basis(
        [w_iso.conj().T @ b.mat @ w_iso for b in basis], tol.rank_tol
    )
    restricted = tuple(np.asarray(b) for b in compressed)

    certified = len(restricted) == r and max_defect <= tol.eq_tol
    if certified:
        # multiplicative closure of the compressed fixed space, plus identity
        stack = np.stack([b.reshape(-1) for b in restricted], axis=1)
        def in_span(mat: np.ndarray) -> float:
            flat = mat.reshape(-1)
            coeffs = stack.conj().T @ flat
            return float(np.linalg.norm(flat - stack @ coeffs))

        if in_span(np.eye(rp)) > tol.eq_tol * np.sqrt(rp):
            certified = False
        else:
            for i in range(len(restricted)):
                for j in range(len(restricted)):
                    prod = restricted[i] @ restricted[j]
                    scale = max(1.0, float(np.linalg.norm(prod)))
                    if in_span(prod) > tol.eq_tol * scale:
                        certified = False
                        break
                if not certified:
                    break

    commutant_consistent: bool | None = None
    if faithful:
        comm = kraus_commutant(phi, tol.rank_tol)
        fixed_stack = np.stack([vec(b.mat) for b in basis], axis=1)
        qf, _ = np.linalg.qr(fixed_stack)
        p_fixed = qf @ qf.conj().T
        if comm.shape[1] == 0:
            commutant_consistent = False
        else:
            p_comm = comm @ comm.conj().T
            commutant_consistent = bool(
                op_norm_mat(p_fixed - p_comm) <= max(tol.rank_tol, 1e-8)
            )

    return FixedPointAnalysis(
        dim=d,
        fixed_dim=r,
        basis=basis,
        projector=projector,
        rho0=rho0,
        support_p=support,
        p_isometry=w_iso,
        faithful=faithful,
        restricted_basis=restricted,
        algebra_certified=bool(certified),
        max_fixed_defect=float(max_defect),
        commutant_consistent=commutant_consistent,
    )


@dataclasses.dataclass(frozen=True)
class MinimalSupportReport:
    """Support-projection identities of the averaged channel."""

    support_unital_defect: float
    kernel_annihilated_defect: float
    sandwich_defect: float
    fixed_states_supported_defect: float
    minimality_margin: float
    expanding_defect: float
    all_pass: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def check_minimal_support(
    analysis: FixedPointAnalysis, phi: OperationMap, tol: Tolerance = DEFAULT_TOL
) -> MinimalSupportReport:
    """Verify the defining properties of the minimal support projection ``P``.

    Checks that the averaged dual maps ``P`` to the identity and its
    complement to zero, that it sandwiches every input invisibly, that all
    state-side fixed operators live inside ``P``, that no rank-one reduction
    of ``P`` keeps the unitality property (minimality probe), and that the
    one-step dual only expands ``P``.
    """
    d = analysis.dim
    p = analysis.support_p.mat
    p_perp = np.eye(d) - p
    av = analysis.average_dual

    unital_defect = op_norm(av(p) - Operator.identity(d))
    kernel_defect = op_norm(av(p_perp))

    sandwich = 0.0
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            sandwich = max(sandwich, op_norm(av(unit) - av(p @ unit @ p)))

    m_dual = to_supermatrix(phi).m
    _, left = _null_spaces(m_dual - np.eye(d * d), tol.rank_tol)
    states_defect = 0.0
    for i in range(left.shape[1]):
        s = unvec(left[:, i], d)
        states_defect = max(states_defect, op_norm_mat(s - p @ s @ p))

    w = analysis.p_isometry
    margin = np.inf
    for i in range(w.shape[1]):
        v = w[:, i]
        q = p - np.outer(v, v.conj())
        margin = min(margin, op_norm(av(q) - Operator.identity(d)))
    margin = float(margin)

    expand_w = np.linalg.eigvalsh((apply_dual(phi, p) - Operator(p)).hermitian_part().mat)
    shrink_w = np.linalg.eigvalsh(
        (Operator(p_perp) - apply_dual(phi, p_perp)).hermitian_part().mat
    )
    expanding_defect = float(max(-expand_w.min(), -shrink_w.min(), 0.0))

    all_pass = (
        unital_defect <= tol.eq_tol
        and kernel_defect <= tol.eq_tol
        and sandwich <= tol.eq_tol
        and states_defect <= tol.eq_tol
        and margin > tol.eq_tol
        and expanding_defect <= tol.eq_tol
    )
    return MinimalSupportReport(
        support_unital_defect=float(unital_defect),
        kernel_annihilated_defect=float(kernel_defect),
        sandwich_defect=float(sandwich),
        fixed_states_supported_defect=float(states_defect),
        minimality_margin=margin,
        expanding_defect=expanding_defect,
        all_pass=bool(all_pass),
    )


def _joint_eigenprojectors(
    mats: Sequence[np.ndarray], tol: Tolerance
) -> tuple[list[np.ndarray], np.ndarray]:
    """Joint eigenprojectors of a commuting Hermitian family.

    Diagonalizes a fixed-seed random real combination, clusters its spectrum
    at ``rank_tol`` gaps, verifies the family is block-diagonal in the
    clustering, and re-draws deterministically on collision.  Returns the
    projectors and the (n_mats, n_clusters) matrix of cluster eigenvalues.
    """
    if not mats:
        raise ValueError("need at least one matrix")
    dim = mats[0].shape[0]
    for attempt in range(8):
        rng = np.random.default_rng(_JOINT_DIAG_SEED + attempt)
        coeffs = rng.standard_normal(len(mats))
        combo = np.zeros((dim, dim), dtype=complex)
        for c, m in zip(coeffs, mats):
            combo += c * m
        combo = 0.5 * (combo + combo.conj().T)
        w, v = np.linalg.eigh(combo)
        clusters: list[list[int]] = [[0]]
        for i in range(1, dim):
            if w[i] - w[i - 1] <= tol.rank_tol * max(1.0, abs(w[i])):
                clusters[-1].append(i)
            else:
                clusters.append([i])
        ok = True
        values = np.zeros((len(mats), len(clusters)))
        for mi, m in enumerate(mats):
            rotated = v.conj().T @ m @ v
            for ci, idx in enumerate(clusters):
                block = rotated[np.ix_(idx, idx)]
                mean = float(np.real(np.trace(block)) / len(idx))
                values[mi, ci] = mean
                off = rotated[np.ix_(idx, [k for k in range(dim) if k not in idx])]
                diag_defect = op_norm_mat(block - mean * np.eye(len(idx)))
                if op_norm_mat(off) > 1e-7 or diag_defect > 1e-7:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            projs = []
            for idx in clusters:
                cols = v[:, idx]
                projs.append(cols @ cols.conj().T)
            return projs, values
    raise RuntimeError(
        "joint diagonalization failed: the family does not commute numerically"
    )


@dataclasses.dataclass(frozen=True)
class ConditionCheck:
    defect: float
    passed: bool
    applicable: bool
    note: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class StructuralReport:
    """Necessary structural conditions on the minimal support.

    Each condition reports its commutation/sharpness defect, whether it
    passes at ``eq_tol``, and whether its hypotheses applied to the inputs;
    non-applicable conditions are informational only.
    """

    faithful: bool
    fixed_dim: int
    support_rank: int
    average_holds: bool
    nondisturbed: bool
    first_kind: bool
    repeatable: bool
    qubit_support_collapse: bool
    conditions: dict[str, ConditionCheck]

    def to_dict(self) -> dict:
        return {
            "faithful": self.faithful,
            "fixed_dim": self.fixed_dim,
            "support_rank": self.support_rank,
            "average_holds": self.average_holds,
            "nondisturbed": self.nondisturbed,
            "first_kind": self.first_kind,
            "repeatable": self.repeatable,
            "qubit_support_collapse": self.qubit_support_collapse,
            "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
        }

    def all_applicable_pass(self) -> bool:
        return all(c.passed for c in self.conditions.values() if c.applicable)


def structural_necessary_conditions(
    m: MeasurementScheme,
    f: Observable,
    q: AdditiveQuantity,
    tol: Tolerance = DEFAULT_TOL,
) -> StructuralReport:
    """Commutation constraints forced by conservation on the support ``P``.

    With average conservation, nondisturbed observables must commute (after
    compression to the support of the measurement channel's fixed states)
    with the measured observable and with the conserved-shift operator;
    first-kind instruments force a commutative compressed measured
    observable that commutes with the compressed system quantity; repeatable
    instruments additionally force sharpness on the support.  For qubit
    systems with rank-one support, the fixed space is trivial and the same
    conditions are evaluated without compression.
    """
    if f.dim != m.sys_dim:
        raise ValueError("observable dimension does not match the system")
    n_comp = _quantity_for_scheme(m, q)
    inst = scheme_to_instrument(m, tol)
    e_obs = measured_observable(m, tol)
    analysis = analyze_fixed_points(inst.total(), tol)
    cons = check_conservation(m.coupling, n_comp, tol)

    delta_max = 0.0
    for _, eff in f.items():
        delta_max = max(delta_max, op_norm(inst.apply_dual_total(eff) - eff))
    nondisturbed = delta_max <= tol.eq_tol

    fk_defect = 0.0
    repeat_gap = np.zeros((m.sys_dim, m.sys_dim), dtype=complex)
    for x, eff in e_obs.items():
        fk_defect = max(fk_defect, op_norm(inst.apply_dual_total(eff) - eff))
        repeat_gap += eff.mat - inst.apply_dual(x, eff).mat
    first_kind = fk_defect <= tol.eq_tol
    repeatable = op_norm_mat(repeat_gap) <= tol.eq_tol

    rp = analysis.p_isometry.shape[1]
    qubit_collapse = m.sys_dim == 2 and rp == 1
    if qubit_collapse:
        # rank-one support on a qubit: the fixed space is trivial and the
        # compression would erase everything, so test on the full space
        compress = lambda a: a.mat if isinstance(a, Operator) else np.asarray(a)
        dual_p = lambda b: inst.apply_dual_total(b).mat
    else:
        compress = analysis.compress
        dual_p = lambda b: analysis.compress(
            inst.apply_dual_total(analysis.embed(b))
        )

    p_e = {x: compress(eff) for x, eff in e_obs.items()}
    p_f = {y: compress(eff) for y, eff in f.items()}
    p_n = compress(q.n_sys)
    shift = dual_p(p_n) - p_n

    conditions: dict[str, ConditionCheck] = {}

    def comm_defect(a: np.ndarray, b: np.ndarray) -> float:
        return float(op_norm_mat(a @ b - b @ a))

    applicable_nd = cons.average_holds and nondisturbed
    worst = max(
        (comm_defect(p_f[y], p_e[x]) for x in e_obs.outcomes for y in f.outcomes),
        default=0.0,
    )
    conditions["nondisturbed-commutes-measured"] = ConditionCheck(
        worst, worst <= tol.eq_tol, applicable_nd
    )
    worst = max((comm_defect(p_f[y], shift) for y in f.outcomes), default=0.0)
    conditions["nondisturbed-commutes-conserved-shift"] = ConditionCheck(
        worst, worst <= tol.eq_tol, applicable_nd
    )

    applicable_fk = cons.average_holds and first_kind
    worst = 0.0
    for i, x in enumerate(e_obs.outcomes):
        for y in e_obs.outcomes[i + 1 :]:
            worst = max(worst, comm_defect(p_e[x], p_e[y]))
    conditions["first-kind-commutative"] = ConditionCheck(
        worst, worst <= tol.eq_tol, applicable_fk
    )
    worst = max((comm_defect(p_e[x], p_n) for x in e_obs.outcomes), default=0.0)
    conditions["first-kind-commutes-quantity"] = ConditionCheck(
        worst, worst <= tol.eq_tol, applicable_fk
    )

    applicable_rp = cons.average_holds and repeatable
    worst = 0.0
    keys = list(p_e)
    for i, x in enumerate(keys):
        a = p_e[x]
        worst = max(worst, float(op_norm_mat(a @ a - a)))
        for y in keys[i + 1 :]:
            worst = max(worst, float(op_norm_mat(a @ p_e[y])))
    conditions["repeatable-sharp-on-support"] = ConditionCheck(
        worst, worst <= tol.eq_tol, applicable_rp
    )

    # a commutative measured observable realized by its own square-root
    # instrument forces full commutation with the system quantity
    luders_defect = 0.0
    ref = luders_instrument(e_obs, tol)
    for x in e_obs.outcomes:
        for i in range(m.sys_dim):
            for j in range(m.sys_dim):
                unit = np.zeros((m.sys_dim, m.sys_dim), dtype=complex)
                unit[i, j] = 1.0
                luders_defect = max(
                    luders_defect,
                    float(op_norm(inst.apply(x, unit) - ref.apply(x, unit))),
                )
    luders_like = luders_defect <= tol.eq_tol
    applicable_luders = (
        cons.average_holds and luders_like and e_obs.is_commutative(tol)
    )
    worst = max(
        (float(op_norm(commutator(eff, q.n_sys))) for _, eff in e_obs.items()),
        default=0.0,
    )
    conditions["luders-commutative-quantity"] = ConditionCheck(
        worst,
        worst <= tol.eq_tol,
        applicable_luders,
        note="" if luders_like else f"instrument differs from square-root form by {luders_defect:.3e}",
    )

    return StructuralReport(
        faithful=analysis.faithful,
        fixed_dim=analysis.fixed_dim,
        support_rank=rp,
        average_holds=cons.average_holds,
        nondisturbed=nondisturbed,
        first_kind=first_kind,
        repeatable=repeatable,
        qubit_support_collapse=qubit_collapse,
        conditions=conditions,
    )


def _quantity_for_scheme(m: MeasurementScheme, q: AdditiveQuantity) -> Operator:
    if q.n_sys.dim != m.sys_dim or q.n_app.dim != m.app_dim:
        raise ValueError("quantity dimensions do not match the scheme")
    return q.composite()


@dataclasses.dataclass(frozen=True)
class Norm1Result:
    """Norm-1 observable extracted from a nondisturbed nontrivial one."""

    observable: Observable
    states: tuple[Operator, ...]
    projectors: tuple[np.ndarray, ...]
    skipped_outcomes: tuple[str, ...]
    faithful: bool
    sharp: bool
    norm_defect: float
    fixed_defect: float
    compression_defect: float
    distinguish_defect: float

    def to_dict(self) -> dict:
        from . import serialize

        return {
            "outcomes": list(self.observable.outcomes),
            "effects": [serialize.matrix_to_json(e.mat) for e in self.observable.effects],
            "skipped_outcomes": list(self.skipped_outcomes),
            "faithful": self.faithful,
            "sharp": self.sharp,
            "norm_defect": self.norm_defect,
            "fixed_defect": self.fixed_defect,
            "compression_defect": self.compression_defect,
            "distinguish_defect": self.distinguish_defect,
        }


def nondisturbed_norm1_observable(
    phi: OperationMap, f: Observable, tol: Tolerance = DEFAULT_TOL
) -> Norm1Result:
    """Refine a nondisturbed nontrivial observable into a norm-1 one.

    Requires every effect of ``f`` fixed by the dual of ``phi`` (error
    otherwise) and ``f`` nontrivial.  The compressed effects are thinned to a
    maximal commuting subfamily greedily in declaration order, their joint
    eigenprojectors ``R(z)`` are averaged back through the channel into
    effects ``G(z)`` with ``P G(z) P = R(z)`` (hence norm one), and each
    ``G(z)`` comes with a state the channel routes to outcome ``z`` with
    certainty.  When the channel has faithful fixed states the result is
    sharp.
    """
    if phi.in_dim != phi.out_dim:
        raise ValueError("needs an endomorphism")
    if f.dim != phi.in_dim:
        raise ValueError("observable dimension does not match the channel")
    if f.is_trivial(tol):
        raise ValueError("observable is trivial; nothing to extract")
    worst_delta = 0.0
    for y, eff in f.items():
        worst_delta = max(worst_delta, op_norm(apply_dual(phi, eff) - eff))
    if worst_delta > tol.eq_tol:
        raise ValueError(
            f"observable is disturbed by the channel (max defect {worst_delta:.3e})"
        )

    analysis = analyze_fixed_points(phi, tol)
    compressed = [analysis.compress(eff) for _, eff in f.items()]
    labels = list(f.outcomes)

    accepted: list[np.ndarray] = []
    skipped: list[str] = []
    for label, a in zip(labels, compressed):
        if all(op_norm_mat(a @ b - b @ a) <= tol.eq_tol for b in accepted):
            accepted.append(a)
        else:
            skipped.append(label)

    projs, values = _joint_eigenprojectors(accepted, tol)
    order = sorted(
        range(len(projs)),
        key=lambda z: tuple(np.round(values[:, z], 9)),
        reverse=True,
    )
    projs = [projs[z] for z in order]

    g_effects = []
    g_projs = []
    norm_defect = 0.0
    fixed_defect = 0.0
    compress_defect = 0.0
    for rz in projs:
        g = analysis.average_dual(analysis.embed(rz)).hermitian_part()
        g_effects.append(g)
        g_projs.append(rz)
        norm_defect = max(norm_defect, abs(op_norm(g) - 1.0))
        fixed_defect = max(fixed_defect, op_norm(apply_dual(phi, g) - g))
        compress_defect = max(compress_defect, op_norm_mat(analysis.compress(g) - rz))

    g_obs = Observable([f"z{k}" for k in range(len(g_effects))], g_effects, tol)

    states = []
    for g in g_effects:
        pz = eigenspace_projector(g, 1.0, tol)
        tr = float(np.real(np.trace(pz.mat)))
        if tr <= tol.rank_tol:
            raise RuntimeError("constructed effect does not attain norm one")
        states.append(Operator(pz.mat / tr))

    distinguish = 0.0
    for zi, rho in enumerate(states):
        out = apply_map(phi, rho)
        for zj, g in enumerate(g_effects):
            p = float(np.real(np.trace(g.mat @ out.mat)))
            distinguish = max(distinguish, abs(p - (1.0 if zi == zj else 0.0)))

    return Norm1Result(
        observable=g_obs,
        states=tuple(states),
        projectors=tuple(g_projs),
        skipped_outcomes=tuple(skipped),
        faithful=analysis.faithful,
        sharp=g_obs.is_sharp(tol),
        norm_defect=float(norm_defect),
        fixed_defect=float(fixed_defect),
        compression_defect=float(compress_defect),
        distinguish_defect=float(distinguish),
    )


@dataclasses.dataclass(frozen=True)
class PostProcessingResult:
    """Classical decomposition ``E(x) = sum_z p(x|z) G(z)``."""

    observable: Observable
    matrix: np.ndarray
    outcomes: tuple[str, ...]
    reconstruction_defect: float
    faithful: bool
    sharp: bool

    def to_dict(self) -> dict:
        from . import serialize

        return {
            "labels": list(self.observable.outcomes),
            "effects": [serialize.matrix_to_json(e.mat) for e in self.observable.effects],
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "outcomes": list(self.outcomes),
            "reconstruction_defect": self.reconstruction_defect,
            "faithful": self.faithful,
            "sharp": self.sharp,
        }


def post_processing_decomposition(
    inst: Instrument, tol: Tolerance = DEFAULT_TOL
) -> PostProcessingResult:
    """Recover the norm-1 observable and stochastic matrix behind a
    first-kind instrument.

    The induced observable must be nontrivial and fixed by the dual of the
    total channel (first-kindness); its compressed effects must commute, as
    the structure theory demands, and non-commutation raises.  Columns of
    ``p`` are sorted ascending-lexicographically so the decomposition is
    reproducible; the recovered effects satisfy ``E(x) = sum_z p(x|z) G(z)``
    up to the reported defect.
    """
    e_obs = inst.induced_observable(tol)
    if e_obs.is_trivial(tol):
        raise ValueError("induced observable is trivial; no decomposition")
    fk_defect = 0.0
    for _, eff in e_obs.items():
        fk_defect = max(fk_defect, op_norm(inst.apply_dual_total(eff) - eff))
    if fk_defect > tol.eq_tol:
        raise ValueError(
            f"instrument is not first-kind (fixed-point defect {fk_defect:.3e})"
        )
    analysis = analyze_fixed_points(inst.total(), tol)
    compressed = [analysis.compress(eff) for _, eff in e_obs.items()]
    worst = 0.0
    for i in range(len(compressed)):
        for j in range(i + 1, len(compressed)):
            a, b = compressed[i], compressed[j]
            worst = max(worst, op_norm_mat(a @ b - b @ a))
    if worst > tol.eq_tol:
        raise ValueError(
            f"compressed effects do not commute (defect {worst:.3e}); "
            "no classical post-processing decomposition exists"
        )
    projs, values = _joint_eigenprojectors(compressed, tol)
    p_mat = np.clip(values, 0.0, 1.0)
    order = sorted(range(len(projs)), key=lambda z: tuple(np.round(p_mat[:, z], 9)))
    projs = [projs[z] for z in order]
    p_mat = p_mat[:, order]

    g_effects = [
        analysis.average_dual(analysis.embed(rz)).hermitian_part() for rz in projs
    ]
    g_obs = Observable([f"z{k}" for k in range(len(g_effects))], g_effects, tol)

    recon = 0.0
    for xi, (_, eff) in enumerate(e_obs.items()):
        acc = np.zeros((inst.dim, inst.dim), dtype=complex)
        for zi, g in enumerate(g_effects):
            acc += p_mat[xi, zi] * g.mat
        recon = max(recon, op_norm_mat(acc - eff.mat))

    return PostProcessingResult(
        observable=g_obs,
        matrix=p_mat,
        outcomes=e_obs.outcomes,
        reconstruction_defect=float(recon),
        faithful=analysis.faithful,
        sharp=g_obs.is_sharp(tol),
    )


def cesaro_supermatrix(phi: OperationMap, n_iter: int) -> np.ndarray:
    """``(1/N) sum_{k=1..N} M^k`` of the dual supermatrix, for cross-checks."""
    m = to_supermatrix(phi).m
    acc = np.zeros_like(m)
    power = np.eye(m.shape[0], dtype=complex)
    for _ in range(n_iter):
        power = power @ m
        acc += power
    return acc / n_iter
