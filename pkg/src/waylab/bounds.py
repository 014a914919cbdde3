"""Quantitative trade-off bounds as BoundReport records.

Four evaluators cover the inequality families:

``eval_disturbance_bounds``
    how much measuring one observable disturbs another, with and without an
    additive conserved quantity;
``eval_measurability_bounds``
    how well a scheme approximates a target observable under conservation;
``eval_way``
    unconditional obstructions to sharp measurements of operators that do
    not commute with the conserved quantity (repeatable/Yanase and
    weak-Yanase routes);
``eval_distinguishability_bounds``
    fidelity and norm-gap limits on connecting orthogonal states through a
    measurement.

Each report records both sides, the slack, and whether the statement's
hypotheses held for the supplied inputs; hypothesis failures are flags, not
errors, except for the structural preconditions spelled out per function.
QFI-based bounds that are only stated under full conservation are skipped
entirely when full conservation fails.
"""

from __future__ import annotations

import dataclasses
from typing import Any

import numpy as np

from .conserve import AdditiveQuantity, check_conservation, qfi, variance, yanase_conditions
from .cpmaps import apply_dual, apply_map
from .measure import (
    Instrument,
    MeasurementScheme,
    Observable,
    measured_observable,
    restriction_maps,
    scheme_to_instrument,
)
from .opcore import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    commutator,
    eigenspace_projector,
    fidelity,
    op_norm,
    op_norm_mat,
)
from .reporting import BoundReport, digest_inputs, make_report, summarize

__all__ = [
    "BoundReport",
    "summarize",
    "DisturbanceProfile",
    "ErrorProfile",
    "disturbance_profile",
    "error_profile",
    "eval_disturbance_bounds",
    "eval_measurability_bounds",
    "eval_way",
    "eval_distinguishability_bounds",
]


@dataclasses.dataclass(frozen=True)
class DisturbanceProfile:
    """Per-outcome disturbance ``delta(y) = I*_X(F(y)) - F(y)``."""

    outcomes: tuple[str, ...]
    deltas: dict[str, Operator]
    norms: dict[str, float]
    max_norm: float


@dataclasses.dataclass(frozen=True)
class ErrorProfile:
    """Per-outcome measurement error ``eps(x) = Lambda*(Z(x)) - target(x)``."""

    outcomes: tuple[str, ...]
    epsilons: dict[str, Operator]
    norms: dict[str, float]
    max_norm: float


def disturbance_profile(
    inst: Instrument, f: Observable, tol: Tolerance = DEFAULT_TOL
) -> DisturbanceProfile:
    if inst.dim != f.dim:
        raise ValueError(
            f"instrument dimension {inst.dim} does not match observable dimension {f.dim}"
        )
    deltas: dict[str, Operator] = {}
    norms: dict[str, float] = {}
    for y, eff in f.items():
        delta = inst.apply_dual_total(eff) - eff
        deltas[y] = delta
        norms[y] = float(op_norm(delta))
    return DisturbanceProfile(
        outcomes=f.outcomes,
        deltas=deltas,
        norms=norms,
        max_norm=max(norms.values()),
    )


def error_profile(
    m: MeasurementScheme, target: Observable, tol: Tolerance = DEFAULT_TOL
) -> ErrorProfile:
    if target.dim != m.sys_dim:
        raise ValueError(
            f"target dimension {target.dim} does not match system dimension {m.sys_dim}"
        )
    if target.outcomes != m.pointer.outcomes:
        raise ValueError(
            f"target outcomes {list(target.outcomes)} do not match pointer outcomes "
            f"{list(m.pointer.outcomes)}"
        )
    measured = measured_observable(m, tol)
    eps: dict[str, Operator] = {}
    norms: dict[str, float] = {}
    for x in target.outcomes:
        gap = measured.effect(x) - target.effect(x)
        eps[x] = gap
        norms[x] = float(op_norm(gap))
    return ErrorProfile(
        outcomes=target.outcomes,
        epsilons=eps,
        norms=norms,
        max_norm=max(norms.values()),
    )


def _unsharpness(eff: Operator) -> float:
    m = eff.mat
    return float(op_norm_mat(m @ m - m))


def _second_moment_defect(inst: Instrument, eff: Operator) -> float:
    """``|| I*_X(F^2) - I*_X(F)^2 ||`` for Hermitian ``F``."""
    img = inst.apply_dual_total(eff).mat
    img_sq = inst.apply_dual_total(eff @ eff).mat
    return float(op_norm_mat(img_sq - img @ img))


def _gamma_moment_defect(m: MeasurementScheme, n: Operator, tol: Tolerance) -> float:
    """``|| Gamma^E_xi(N^2) - Gamma^E_xi(N)^2 ||`` on the composite."""
    maps = restriction_maps(m, tol)
    first = apply_map(maps.gamma_xi_e, n).mat
    second = apply_map(maps.gamma_xi_e, n @ n).mat
    return float(op_norm_mat(second - first @ first))


def _check_quantity(m: MeasurementScheme, q: AdditiveQuantity) -> Operator:
    if q.n_sys.dim != m.sys_dim or q.n_app.dim != m.app_dim:
        raise ValueError(
            f"quantity dimensions ({q.n_sys.dim}, {q.n_app.dim}) do not match the scheme "
            f"({m.sys_dim}, {m.app_dim})"
        )
    return q.composite()


def _scheme_digest_items(m: MeasurementScheme) -> list:
    return [
        m.sys_dim,
        m.app_dim,
        m.xi,
        list(m.coupling.kraus),
        list(m.pointer.outcomes),
        [e.mat for e in m.pointer.effects],
    ]


def eval_disturbance_bounds(
    m: MeasurementScheme,
    f: Observable,
    q: AdditiveQuantity | None = None,
    assert_extremal: bool = False,
    tol: Tolerance = DEFAULT_TOL,
) -> list[BoundReport]:
    """Commutation-disturbance trade-offs for the scheme's instrument.

    Always emitted, per outcome pair ``(x, y)`` of the measured and probed
    observables: the joint-measurability commutator bound (hypothesis:
    nondisturbance), the second-moment disturbance bound (no hypothesis),
    its exact-nondisturbance refinement (hypothesis: ``delta(y) = 0``), and
    the observable-level coarse bound (no hypothesis).  With a quantity
    ``q``: the conserved variants gated by average conservation, plus the
    Fisher-information forms, which are emitted only under full conservation
    (and the extremal one only when the caller asserts instrument
    extremality).
    """
    if f.dim != m.sys_dim:
        raise ValueError(
            f"observable dimension {f.dim} does not match system dimension {m.sys_dim}"
        )
    inst = scheme_to_instrument(m, tol)
    e_obs = measured_observable(m, tol)
    digest_items = _scheme_digest_items(m) + [
        list(f.outcomes),
        [e.mat for e in f.effects],
        bool(assert_extremal),
    ]
    if q is not None:
        digest_items += [q.n_sys, q.n_app]
    digest = digest_inputs("disturbance", *digest_items)

    prof = disturbance_profile(inst, f, tol)
    unsharp_e = {x: _unsharpness(eff) for x, eff in e_obs.items()}
    unsharp_f = {y: _unsharpness(eff) for y, eff in f.items()}
    sesq_f = {y: _second_moment_defect(inst, eff) for y, eff in f.items()}
    exact_f = {
        y: float(
            op_norm_mat(
                inst.apply_dual_total(eff @ eff).mat - eff.mat @ eff.mat
            )
        )
        for y, eff in f.items()
    }
    nondisturbed = prof.max_norm <= tol.eq_tol

    reports: list[BoundReport] = []
    for x, ex in e_obs.items():
        for y, fy in f.items():
            pair = f"({x},{y})"
            lhs = float(op_norm(commutator(ex, fy)))
            reports.append(
                make_report(
                    "compat-commutator",
                    pair,
                    lhs,
                    2.0 * np.sqrt(unsharp_e[x]) * np.sqrt(unsharp_f[y]),
                    tol,
                    digest,
                    hypothesis_satisfied=nondisturbed,
                    hypothesis=(
                        f"joint measurability via nondisturbance "
                        f"(max ||delta|| = {prof.max_norm:.3e})"
                    ),
                )
            )
            reports.append(
                make_report(
                    "disturb-commutator",
                    pair,
                    lhs,
                    prof.norms[y] + 2.0 * np.sqrt(unsharp_e[x]) * np.sqrt(sesq_f[y]),
                    tol,
                    digest,
                )
            )
            reports.append(
                make_report(
                    "disturb-commutator-nondisturbing",
                    pair,
                    lhs,
                    2.0 * np.sqrt(unsharp_e[x]) * np.sqrt(exact_f[y]),
                    tol,
                    digest,
                    hypothesis_satisfied=prof.norms[y] <= tol.eq_tol,
                    hypothesis=f"delta(y) = 0 (||delta(y)|| = {prof.norms[y]:.3e})",
                )
            )
            reports.append(
                make_report(
                    "disturb-commutator-unsharpness",
                    pair,
                    lhs,
                    prof.norms[y]
                    + 2.0
                    * np.sqrt(unsharp_e[x])
                    * np.sqrt(2.0 * prof.norms[y] + unsharp_f[y]),
                    tol,
                    digest,
                )
            )

    if q is None:
        return reports

    n_comp = _check_quantity(m, q)
    cons = check_conservation(m.coupling, n_comp, tol)
    ns_norm = op_norm(q.n_sys)
    gamma_defect = _gamma_moment_defect(m, n_comp, tol)
    avg_hyp = f"average conservation (defect = {cons.average_defect:.3e})"

    for y, fy in f.items():
        comm = commutator(fy, q.n_sys)
        lhs = float(op_norm(comm - inst.apply_dual_total(comm)))
        base = 2.0 * ns_norm * prof.norms[y]
        reports.append(
            make_report(
                "conserve-disturb-commutator",
                y,
                lhs,
                base + 2.0 * np.sqrt(gamma_defect) * np.sqrt(sesq_f[y]),
                tol,
                digest,
                hypothesis_satisfied=cons.average_holds,
                hypothesis=avg_hyp,
            )
        )
        reports.append(
            make_report(
                "conserve-disturb-commutator-nondisturbing",
                y,
                lhs,
                base + 2.0 * np.sqrt(gamma_defect) * np.sqrt(exact_f[y]),
                tol,
                digest,
                hypothesis_satisfied=cons.average_holds and prof.norms[y] <= tol.eq_tol,
                hypothesis=avg_hyp + f" + delta(y) = 0 (||delta(y)|| = {prof.norms[y]:.3e})",
            )
        )
        reports.append(
            make_report(
                "conserve-disturb-unsharpness",
                y,
                lhs,
                base
                + 2.0
                * np.sqrt(gamma_defect)
                * np.sqrt(2.0 * prof.norms[y] + unsharp_f[y]),
                tol,
                digest,
                hypothesis_satisfied=cons.average_holds,
                hypothesis=avg_hyp,
            )
        )

    if cons.full_holds:
        qval = qfi(q.n_app, m.xi, tol)
        full_hyp = f"full conservation (defect = {cons.full_defect:.3e})"
        for y, fy in f.items():
            comm = commutator(fy, q.n_sys)
            lhs = float(op_norm(comm - inst.apply_dual_total(comm)))
            base = 2.0 * ns_norm * prof.norms[y]
            reports.append(
                make_report(
                    "conserve-disturb-qfi",
                    y,
                    lhs,
                    base + 0.5 * np.sqrt(qval),
                    tol,
                    digest,
                    hypothesis=full_hyp,
                )
            )
            if assert_extremal:
                reports.append(
                    make_report(
                        "conserve-disturb-qfi-extremal",
                        y,
                        lhs,
                        base + np.sqrt(qval) * np.sqrt(sesq_f[y]),
                        tol,
                        digest,
                        hypothesis=full_hyp + " + caller-asserted extremal instrument",
                    )
                )
    return reports


def eval_measurability_bounds(
    m: MeasurementScheme,
    target: Observable,
    q: AdditiveQuantity,
    assert_extremal: bool = False,
    tol: Tolerance = DEFAULT_TOL,
) -> list[BoundReport]:
    """Error trade-offs for approximating ``target`` under conservation.

    Per outcome: the commutator transfer bound (hypothesis: average
    conservation) and, under full conservation only, the Fisher-information
    bound plus its extremal ``eps = 0`` refinement when requested.
    """
    prof = error_profile(m, target, tol)
    n_comp = _check_quantity(m, q)
    cons = check_conservation(m.coupling, n_comp, tol)
    maps = restriction_maps(m, tol)
    ns_norm = op_norm(q.n_sys)
    gamma_defect = _gamma_moment_defect(m, n_comp, tol)
    digest = digest_inputs(
        "measurability",
        *_scheme_digest_items(m),
        list(target.outcomes),
        [e.mat for e in target.effects],
        q.n_sys,
        q.n_app,
        bool(assert_extremal),
    )
    avg_hyp = f"average conservation (defect = {cons.average_defect:.3e})"
    reports: list[BoundReport] = []
    unsharp_t = {x: _unsharpness(eff) for x, eff in target.items()}
    for x, tx in target.items():
        pointer_comm = commutator(m.pointer.effect(x), q.n_app)
        transferred = apply_map(maps.conj_dual, pointer_comm).mat
        lhs = float(op_norm_mat(commutator(tx, q.n_sys).mat - transferred))
        reports.append(
            make_report(
                "measure-error-commutator",
                x,
                lhs,
                2.0 * ns_norm * prof.norms[x]
                + 2.0
                * np.sqrt(gamma_defect)
                * np.sqrt(2.0 * prof.norms[x] + unsharp_t[x]),
                tol,
                digest,
                hypothesis_satisfied=cons.average_holds,
                hypothesis=avg_hyp,
            )
        )
    if cons.full_holds:
        qval = qfi(q.n_app, m.xi, tol)
        full_hyp = f"full conservation (defect = {cons.full_defect:.3e})"
        for x, tx in target.items():
            pointer_comm = commutator(m.pointer.effect(x), q.n_app)
            transferred = apply_map(maps.conj_dual, pointer_comm).mat
            lhs = float(op_norm_mat(commutator(tx, q.n_sys).mat - transferred))
            reports.append(
                make_report(
                    "measure-error-qfi",
                    x,
                    lhs,
                    2.0 * ns_norm * prof.norms[x] + 0.5 * np.sqrt(qval),
                    tol,
                    digest,
                    hypothesis=full_hyp,
                )
            )
            if assert_extremal:
                reports.append(
                    make_report(
                        "measure-error-qfi-extremal",
                        x,
                        lhs,
                        np.sqrt(qval) * np.sqrt(unsharp_t[x]),
                        tol,
                        digest,
                        hypothesis_satisfied=prof.norms[x] <= tol.eq_tol,
                        hypothesis=(
                            full_hyp
                            + " + caller-asserted extremal target + exact measurement "
                            f"(||eps(x)|| = {prof.norms[x]:.3e})"
                        ),
                    )
                )
    return reports


def eval_way(
    m: MeasurementScheme, q: AdditiveQuantity, tol: Tolerance = DEFAULT_TOL
) -> list[BoundReport]:
    """Measurability obstructions for the scheme's own measured observable.

    The unsharpness bound (repeatable-or-Yanase route) is emitted only when
    one disjunct holds within ``eq_tol``; its hypothesis flag additionally
    records average conservation.  The weak-Yanase variance and Fisher forms
    are always emitted with the weak Yanase condition as hypothesis; the
    target here is the measured observable itself, so the error terms of the
    general statements vanish identically.
    """
    inst = scheme_to_instrument(m, tol)
    e_obs = measured_observable(m, tol)
    n_comp = _check_quantity(m, q)
    cons = check_conservation(m.coupling, n_comp, tol)
    yan = yanase_conditions(m, q, tol)
    ns_norm = op_norm(q.n_sys)
    digest = digest_inputs("way", *_scheme_digest_items(m), q.n_sys, q.n_app)

    eye = np.eye(m.sys_dim)
    repeat_gap = np.zeros((m.sys_dim, m.sys_dim), dtype=complex)
    for x, eff in e_obs.items():
        repeat_gap += eff.mat - inst.apply_dual(x, eff).mat
    repeat_defect = float(op_norm_mat(repeat_gap))
    repeatable = repeat_defect <= tol.eq_tol
    yanase_ok = yan.yanase_defect <= tol.eq_tol

    unsharp_e = {x: _unsharpness(eff) for x, eff in e_obs.items()}
    lhs_by_outcome = {
        x: float(op_norm(commutator(eff, q.n_sys))) for x, eff in e_obs.items()
    }
    reports: list[BoundReport] = []

    if repeatable or yanase_ok:
        gamma_defect = _gamma_moment_defect(m, n_comp, tol)
        route = (
            f"repeatable instrument (defect = {repeat_defect:.3e})"
            if repeatable
            else f"pointer Yanase condition (defect = {yan.yanase_defect:.3e})"
        )
        hyp = f"average conservation (defect = {cons.average_defect:.3e}) + {route}"
        for x in e_obs.outcomes:
            reports.append(
                make_report(
                    "way-unsharpness",
                    x,
                    lhs_by_outcome[x],
                    2.0 * np.sqrt(gamma_defect) * np.sqrt(unsharp_e[x]),
                    tol,
                    digest,
                    hypothesis_satisfied=cons.average_holds,
                    hypothesis=hyp,
                )
            )

    weak_ok = yan.weak_defect <= tol.eq_tol
    weak_hyp = f"weak Yanase condition (defect = {yan.weak_defect:.3e})"
    var_xi = variance(q.n_app, m.xi, tol)
    qval = qfi(q.n_app, m.xi, tol)
    for x in e_obs.outcomes:
        reports.append(
            make_report(
                "way-weak-yanase-variance",
                x,
                lhs_by_outcome[x],
                2.0 * np.sqrt(var_xi) * np.sqrt(unsharp_e[x]),
                tol,
                digest,
                hypothesis_satisfied=weak_ok,
                hypothesis=weak_hyp,
            )
        )
        reports.append(
            make_report(
                "way-weak-yanase-qfi",
                x,
                lhs_by_outcome[x],
                0.5 * np.sqrt(qval),
                tol,
                digest,
                hypothesis_satisfied=weak_ok,
                hypothesis=weak_hyp,
            )
        )
    return reports


def eval_distinguishability_bounds(
    m: MeasurementScheme,
    q: AdditiveQuantity,
    psi: Any,
    phi: Any,
    thm7_outcome: str | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> list[BoundReport]:
    """Limits on coherently connecting two orthogonal input vectors.

    Emits the fidelity bound for the supplied pair (error if the vectors are
    not orthonormal), norm-gap bounds for every outcome whose extreme
    eigenspaces contain the pair (or the named ``thm7_outcome``, which raises
    if membership fails), and, for repeatable instruments, the commutation
    check of each measured effect against the support-compressed system
    quantity.
    """
    dS = m.sys_dim
    psi_v = np.asarray(psi, dtype=complex).reshape(-1)
    phi_v = np.asarray(phi, dtype=complex).reshape(-1)
    if psi_v.shape != (dS,) or phi_v.shape != (dS,):
        raise ValueError(f"vectors must have length {dS}")
    for name, v in (("psi", psi_v), ("phi", phi_v)):
        if abs(np.linalg.norm(v) - 1.0) > tol.eq_tol:
            raise ValueError(f"{name} is not normalized (norm {np.linalg.norm(v):.6f})")
    overlap = abs(np.vdot(psi_v, phi_v))
    if overlap > tol.eq_tol:
        raise ValueError(f"psi and phi are not orthogonal (|<psi|phi>| = {overlap:.3e})")

    inst = scheme_to_instrument(m, tol)
    e_obs = measured_observable(m, tol)
    maps = restriction_maps(m, tol)
    n_comp = _check_quantity(m, q)
    cons = check_conservation(m.coupling, n_comp, tol)
    digest = digest_inputs(
        "distinguishability", *_scheme_digest_items(m), q.n_sys, q.n_app, psi_v, phi_v
    )
    avg_hyp = f"average conservation (defect = {cons.average_defect:.3e})"

    rho_psi = Operator(np.outer(psi_v, psi_v.conj()))
    rho_phi = Operator(np.outer(phi_v, phi_v.conj()))
    total = inst.total()
    out_fid = fidelity(apply_map(total, rho_psi), apply_map(total, rho_phi), tol)
    conj_fid = fidelity(
        apply_map(maps.conj_channel, rho_psi), apply_map(maps.conj_channel, rho_phi), tol
    )
    lhs_overlap = float(abs(np.vdot(psi_v, q.n_sys.mat @ phi_v)))
    na_norm = op_norm(q.n_app)
    ns_norm = op_norm(q.n_sys)

    reports: list[BoundReport] = [
        make_report(
            "distinguish-fidelity",
            "",
            lhs_overlap,
            na_norm * out_fid + ns_norm * conj_fid,
            tol,
            digest,
            hypothesis_satisfied=cons.average_holds,
            hypothesis=avg_hyp,
        )
    ]

    fk_defect = 0.0
    for x, eff in e_obs.items():
        fk_defect = max(fk_defect, float(op_norm(inst.apply_dual_total(eff) - eff)))
    first_kind = fk_defect <= tol.eq_tol

    eye = np.eye(dS)
    for x, eff in e_obs.items():
        a = float(op_norm(eff))
        b = 1.0 - float(op_norm(Operator(eye) - eff))
        if a - b <= tol.rank_tol:
            if thm7_outcome is not None and x == thm7_outcome:
                raise ValueError(
                    f"outcome {x!r}: effect is trivial (max and min eigenvalues coincide)"
                )
            continue
        p_max = eigenspace_projector(eff, a, tol)
        p_min = eigenspace_projector(eff, b, tol)
        res_psi = float(np.linalg.norm(psi_v - p_max.mat @ psi_v))
        res_phi = float(np.linalg.norm(phi_v - p_min.mat @ phi_v))
        member = res_psi <= tol.rank_tol and res_phi <= tol.rank_tol
        if not member:
            if thm7_outcome is not None and x == thm7_outcome:
                raise ValueError(
                    f"outcome {x!r}: psi/phi are outside the extreme eigenspaces "
                    f"(residuals {res_psi:.3e}, {res_phi:.3e})"
                )
            continue
        rhs = ns_norm * (
            np.sqrt(a) * np.sqrt(max(b, 0.0))
            + np.sqrt(max(1.0 - a, 0.0)) * np.sqrt(max(1.0 - b, 0.0))
        )
        reports.append(
            make_report(
                "distinguish-norm-gap",
                x,
                lhs_overlap,
                float(rhs),
                tol,
                digest,
                hypothesis_satisfied=cons.average_holds and first_kind,
                hypothesis=avg_hyp
                + f" + first-kind instrument (defect = {fk_defect:.3e})",
            )
        )

    repeat_gap = np.zeros((dS, dS), dtype=complex)
    for x, eff in e_obs.items():
        repeat_gap += eff.mat - inst.apply_dual(x, eff).mat
    repeat_defect = float(op_norm_mat(repeat_gap))
    if repeat_defect <= tol.eq_tol:
        p_total = np.zeros((dS, dS), dtype=complex)
        for x, eff in e_obs.items():
            if op_norm(eff) > tol.rank_tol:
                p_total += eigenspace_projector(eff, 1.0, tol).mat
        compressed = Operator(p_total @ q.n_sys.mat @ p_total)
        for x, eff in e_obs.items():
            reports.append(
                make_report(
                    "repeat-commutant",
                    x,
                    float(op_norm(commutator(eff, compressed))),
                    0.0,
                    tol,
                    digest,
                    hypothesis_satisfied=cons.average_holds,
                    hypothesis=avg_hyp
                    + f" + repeatable instrument (defect = {repeat_defect:.3e})",
                )
            )
    return reports
