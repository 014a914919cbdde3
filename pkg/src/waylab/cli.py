"""Command-line front end.

Three subcommands: ``run`` evaluates scenario files, ``builtin`` materializes
(and optionally runs) named example scenarios, and ``suite`` executes a fixed
deterministic battery whose report is byte-identical across runs.

A scenario is a JSON object declaring named operators, observables,
instruments, channels, schemes, vectors, and additive quantities, plus a
task list binding them to evaluators.  Every run emits one report object:
the evaluated bound inequalities (sorted), the per-task records, and a
summary.  Exit code 0 means every hypothesis-satisfying bound held and every
certification task passed; 1 flags a violation or failed certification; 2
flags a schema or validation error in the inputs.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import Any

import numpy as np

from . import serialize
from .bounds import (
    eval_distinguishability_bounds,
    eval_disturbance_bounds,
    eval_measurability_bounds,
    eval_way,
)
from .conserve import (
    AdditiveQuantity,
    check_conservation,
    check_unitary_equivalence,
    conservative_unitary,
    yanase_conditions,
)
from .cpmaps import OperationMap, operation_from_json, operation_to_json
from .fixpt import (
    analyze_fixed_points,
    cesaro_supermatrix,
    check_minimal_support,
    nondisturbed_norm1_observable,
    post_processing_decomposition,
    structural_necessary_conditions,
)
from .measure import (
    Instrument,
    MeasurementScheme,
    Observable,
    instrument_from_json,
    instrument_to_json,
    luders_instrument,
    normal_dilation,
    observable_from_json,
    observable_to_json,
    repeatability_report,
    scheme_from_json,
    scheme_to_instrument,
    scheme_to_json,
    sharp_observable,
)
from .opcore import DEFAULT_TOL, Operator, Tolerance, op_norm_mat
from .rand import random_state
from .reporting import BoundReport, summarize
from .serialize import SchemaError

_OBJECT_KINDS = (
    "operator",
    "vector",
    "observable",
    "instrument",
    "channel",
    "scheme",
    "quantity",
)


class _Scenario:
    def __init__(self, name: str, sys_dim: int, tol: Tolerance):
        self.name = name
        self.sys_dim = sys_dim
        self.tol = tol
        self.objects: dict[str, tuple[str, Any]] = {}

    def get(self, task_idx: int, field: str, name: Any, kinds: tuple[str, ...]) -> Any:
        where = f"tasks[{task_idx}].{field}"
        if not isinstance(name, str):
            raise SchemaError(f"{where}: expected an object name string")
        if name not in self.objects:
            raise SchemaError(f"{where}: no object named {name!r}")
        kind, value = self.objects[name]
        if kind not in kinds:
            raise SchemaError(
                f"{where}: object {name!r} has kind {kind!r}, expected one of {kinds}"
            )
        return value


def _resolve_tolerance(scenario_obj: dict, args: argparse.Namespace) -> Tolerance:
    """Precedence: command line over environment over scenario over default."""
    eq = DEFAULT_TOL.eq_tol
    rank = DEFAULT_TOL.rank_tol
    block = scenario_obj.get("tolerance")
    if block is not None:
        if not isinstance(block, dict):
            raise SchemaError("tolerance: expected an object")
        if "eq_tol" in block:
            eq = float(block["eq_tol"])
        if "rank_tol" in block:
            rank = float(block["rank_tol"])
    env_eq = os.environ.get("WAYLAB_TOL")
    if env_eq is not None:
        eq = float(env_eq)
    env_rank = os.environ.get("WAYLAB_RANK_TOL")
    if env_rank is not None:
        rank = float(env_rank)
    if getattr(args, "tol", None) is not None:
        eq = args.tol
    if getattr(args, "rank_tol", None) is not None:
        rank = args.rank_tol
    try:
        return Tolerance(eq_tol=eq, rank_tol=rank)
    except ValueError as exc:
        raise SchemaError(f"tolerance: {exc}") from exc


def _parse_object(name: str, obj: Any, sys_dim: int, tol: Tolerance) -> tuple[str, Any]:
    where = f"objects.{name}"
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    kind = obj.get("kind")
    if kind not in _OBJECT_KINDS:
        raise SchemaError(f"{where}.kind: expected one of {_OBJECT_KINDS}, got {kind!r}")
    if kind == "operator":
        return kind, Operator(serialize.matrix_from_json(obj.get("matrix"), f"{where}.matrix"))
    if kind == "vector":
        return kind, serialize.vector_from_json(obj.get("values"), f"{where}.values")
    if kind == "observable":
        return kind, observable_from_json(obj, where, tol)
    if kind == "instrument":
        return kind, instrument_from_json(obj, where, tol)
    if kind == "channel":
        phi = operation_from_json(obj, where)
        if not phi.is_channel(tol):
            raise SchemaError(f"{where}: Kraus operators do not form a channel")
        return kind, phi
    if kind == "scheme":
        return kind, scheme_from_json(obj, sys_dim, where, tol)
    if kind == "quantity":
        n_sys = serialize.matrix_from_json(obj.get("system"), f"{where}.system")
        n_app = serialize.matrix_from_json(obj.get("apparatus"), f"{where}.apparatus")
        try:
            return kind, AdditiveQuantity(n_sys=n_sys, n_app=n_app)
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    raise SchemaError(f"{where}.kind: unhandled kind {kind!r}")


def parse_scenario(obj: Any, args: argparse.Namespace) -> tuple[_Scenario, list[dict]]:
    if not isinstance(obj, dict):
        raise SchemaError("scenario: expected a JSON object")
    if obj.get("schema") != 1:
        raise SchemaError("scenario.schema: expected the integer 1")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise SchemaError("scenario.name: expected a non-empty string")
    sys_dim = obj.get("system_dim")
    if not isinstance(sys_dim, int) or sys_dim < 1:
        raise SchemaError("scenario.system_dim: expected a positive integer")
    tol = _resolve_tolerance(obj, args)
    scn = _Scenario(name, sys_dim, tol)
    objects = obj.get("objects", {})
    if not isinstance(objects, dict):
        raise SchemaError("scenario.objects: expected an object")
    for obj_name, body in objects.items():
        scn.objects[obj_name] = _parse_object(obj_name, body, sys_dim, tol)
    tasks = obj.get("tasks")
    if not isinstance(tasks, list) or not tasks:
        raise SchemaError("scenario.tasks: expected a non-empty list")
    for i, t in enumerate(tasks):
        if not isinstance(t, dict) or not isinstance(t.get("op"), str):
            raise SchemaError(f"tasks[{i}]: expected an object with an 'op' string")
    return scn, tasks


def _as_channel(scn: _Scenario, idx: int, task: dict) -> OperationMap:
    """Accept a channel, an instrument's total, or a scheme's total channel."""
    if "channel" in task:
        return scn.get(idx, "channel", task["channel"], ("channel",))
    if "instrument" in task:
        inst = scn.get(idx, "instrument", task["instrument"], ("instrument",))
        return inst.total()
    if "scheme" in task:
        m = scn.get(idx, "scheme", task["scheme"], ("scheme",))
        return scheme_to_instrument(m, scn.tol).total()
    raise SchemaError(f"tasks[{idx}]: needs one of 'channel', 'instrument', 'scheme'")


def _as_instrument(scn: _Scenario, idx: int, task: dict) -> Instrument:
    if "instrument" in task:
        return scn.get(idx, "instrument", task["instrument"], ("instrument",))
    if "scheme" in task:
        m = scn.get(idx, "scheme", task["scheme"], ("scheme",))
        return scheme_to_instrument(m, scn.tol)
    raise SchemaError(f"tasks[{idx}]: needs 'instrument' or 'scheme'")


def run_task(scn: _Scenario, idx: int, task: dict) -> tuple[dict, list[BoundReport]]:
    op = task["op"]
    tol = scn.tol
    record: dict[str, Any] = {"index": idx, "op": op, "ok": None}
    reports: list[BoundReport] = []

    if op == "disturbance-bounds":
        m = scn.get(idx, "scheme", task.get("scheme"), ("scheme",))
        f = scn.get(idx, "observable", task.get("observable"), ("observable",))
        q = None
        if "quantity" in task:
            q = scn.get(idx, "quantity", task["quantity"], ("quantity",))
        reports = eval_disturbance_bounds(
            m, f, q, bool(task.get("assert_extremal", False)), tol
        )
        record["bounds_emitted"] = len(reports)
    elif op == "measurability-bounds":
        m = scn.get(idx, "scheme", task.get("scheme"), ("scheme",))
        target = scn.get(idx, "target", task.get("target"), ("observable",))
        q = scn.get(idx, "quantity", task.get("quantity"), ("quantity",))
        reports = eval_measurability_bounds(
            m, target, q, bool(task.get("assert_extremal", False)), tol
        )
        record["bounds_emitted"] = len(reports)
    elif op == "way-bounds":
        m = scn.get(idx, "scheme", task.get("scheme"), ("scheme",))
        q = scn.get(idx, "quantity", task.get("quantity"), ("quantity",))
        reports = eval_way(m, q, tol)
        record["bounds_emitted"] = len(reports)
    elif op == "distinguishability-bounds":
        m = scn.get(idx, "scheme", task.get("scheme"), ("scheme",))
        q = scn.get(idx, "quantity", task.get("quantity"), ("quantity",))
        psi = scn.get(idx, "psi", task.get("psi"), ("vector",))
        phi = scn.get(idx, "phi", task.get("phi"), ("vector",))
        outcome = task.get("outcome")
        reports = eval_distinguishability_bounds(m, q, psi, phi, outcome, tol)
        record["bounds_emitted"] = len(reports)
    elif op == "conservation":
        if "scheme" in task:
            m = scn.get(idx, "scheme", task["scheme"], ("scheme",))
            q = scn.get(idx, "quantity", task.get("quantity"), ("quantity",))
            rep = check_conservation(m.coupling, q.composite(), tol)
        else:
            phi = _as_channel(scn, idx, task)
            n = scn.get(idx, "operator", task.get("operator"), ("operator",))
            rep = check_conservation(phi, n, tol)
        record.update(rep.to_dict())
    elif op == "unitary-equivalence":
        u = scn.get(idx, "unitary", task.get("unitary"), ("operator",))
        n = scn.get(idx, "operator", task.get("operator"), ("operator",))
        rep = check_unitary_equivalence(u, n, tol)
        record.update(rep.to_dict())
        record["ok"] = rep.consistent
    elif op == "repeatability":
        inst = _as_instrument(scn, idx, task)
        m = None
        if "scheme" in task:
            m = scn.get(idx, "scheme", task["scheme"], ("scheme",))
        rep = repeatability_report(inst, m, tol)
        record.update(rep.to_dict())
        if rep.repeatable:
            failed = [
                k for k, item in rep.items.items() if item.evaluated and not item.passed
            ]
            record["ok"] = not failed
            if failed:
                record["failed_items"] = failed
    elif op == "fixed-points":
        phi = _as_channel(scn, idx, task)
        analysis = analyze_fixed_points(phi, tol)
        support = check_minimal_support(analysis, phi, tol)
        record["analysis"] = analysis.to_dict()
        record["support_checks"] = support.to_dict()
        record["ok"] = bool(
            analysis.algebra_certified
            and support.all_pass
            and analysis.commutant_consistent in (None, True)
        )
    elif op == "structural":
        m = scn.get(idx, "scheme", task.get("scheme"), ("scheme",))
        f = scn.get(idx, "observable", task.get("observable"), ("observable",))
        q = scn.get(idx, "quantity", task.get("quantity"), ("quantity",))
        rep = structural_necessary_conditions(m, f, q, tol)
        record.update(rep.to_dict())
        record["ok"] = rep.all_applicable_pass()
    elif op == "norm1-observable":
        phi = _as_channel(scn, idx, task)
        f = scn.get(idx, "observable", task.get("observable"), ("observable",))
        res = nondisturbed_norm1_observable(phi, f, tol)
        record.update(res.to_dict())
        worst = max(
            res.norm_defect, res.fixed_defect, res.compression_defect, res.distinguish_defect
        )
        record["ok"] = worst <= 1e-7
    elif op == "post-processing":
        inst = _as_instrument(scn, idx, task)
        res = post_processing_decomposition(inst, tol)
        record.update(res.to_dict())
        record["ok"] = res.reconstruction_defect <= 1e-7
    elif op == "yanase":
        m = scn.get(idx, "scheme", task.get("scheme"), ("scheme",))
        q = scn.get(idx, "quantity", task.get("quantity"), ("quantity",))
        rep = yanase_conditions(m, q, tol)
        record.update(rep.to_dict())
        if rep.equivalence_applicable:
            record["ok"] = rep.equivalence_consistent
    else:
        raise SchemaError(f"tasks[{idx}].op: unknown operation {op!r}")
    return record, reports


def run_scenario(scn: _Scenario, tasks: list[dict]) -> dict:
    records: list[dict] = []
    all_reports: list[BoundReport] = []
    for i, task in enumerate(tasks):
        try:
            record, reports = run_task(scn, i, task)
        except SchemaError:
            raise
        except (ValueError, RuntimeError) as exc:
            raise SchemaError(f"tasks[{i}] ({task['op']}): {exc}") from exc
        records.append(record)
        all_reports.extend(reports)
    all_reports.sort(key=lambda r: (r.inputs_digest, r.bound_id, r.outcome))
    summary = summarize(all_reports)
    summary["tasks_ok"] = sum(1 for r in records if r["ok"] is True)
    summary["tasks_failed"] = sum(1 for r in records if r["ok"] is False)
    return {
        "schema": 1,
        "scenario": scn.name,
        "tolerance": {"eq_tol": scn.tol.eq_tol, "rank_tol": scn.tol.rank_tol},
        "tasks": records,
        "bounds": [r.to_dict() for r in all_reports],
        "summary": summary,
    }


def _report_exit(report: dict) -> int:
    s = report["summary"]
    return 1 if (s["violated"] > 0 or s["tasks_failed"] > 0) else 0


def _write_csv(path: str, reports: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "scenario",
                "bound_id",
                "outcome",
                "lhs",
                "rhs",
                "slack",
                "satisfied",
                "hypothesis_satisfied",
                "inputs_digest",
            ]
        )
        for rep in reports:
            for b in rep["bounds"]:
                writer.writerow(
                    [
                        rep["scenario"],
                        b["bound_id"],
                        b["outcome"],
                        serialize.format_float(b["lhs"]),
                        serialize.format_float(b["rhs"]),
                        serialize.format_float(b["slack"]),
                        b["satisfied"],
                        b["hypothesis_satisfied"],
                        b["inputs_digest"],
                    ]
                )


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# builtin scenarios
# ---------------------------------------------------------------------------

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)


def _builtin_qubit_luders(args: argparse.Namespace) -> dict:
    lam = args.lam
    if not 0.0 < lam <= 1.0:
        raise SchemaError(f"--lam must lie in (0, 1], got {lam}")
    b_plus = 0.5 * (np.eye(2) + lam * _SX)
    b_minus = 0.5 * (np.eye(2) - lam * _SX)
    b = Observable(["plus", "minus"], [b_plus, b_minus])
    inst = luders_instrument(b)
    m = normal_dilation(b)
    f = sharp_observable(_SZ)
    objects = {
        "B": {"kind": "observable", **observable_to_json(b)},
        "F": {"kind": "observable", **observable_to_json(f)},
        "I": {"kind": "instrument", **instrument_to_json(inst)},
        "M": {"kind": "scheme", **scheme_to_json(m)},
        "N": {
            "kind": "quantity",
            "system": serialize.matrix_to_json(0.5 * _SZ),
            "apparatus": serialize.matrix_to_json(0.5 * _SZ),
        },
    }
    tasks = [
        {"op": "disturbance-bounds", "scheme": "M", "observable": "F", "quantity": "N"},
        {"op": "disturbance-bounds", "scheme": "M", "observable": "B"},
        {"op": "way-bounds", "scheme": "M", "quantity": "N"},
        {"op": "conservation", "scheme": "M", "quantity": "N"},
        {"op": "repeatability", "scheme": "M"},
        {"op": "fixed-points", "instrument": "I"},
        {"op": "structural", "scheme": "M", "observable": "F", "quantity": "N"},
    ]
    return {
        "schema": 1,
        "name": f"qubit-luders-lam{lam:g}",
        "system_dim": 2,
        "objects": objects,
        "tasks": tasks,
    }


def _builtin_qutrit_average_vs_full(args: argparse.Namespace) -> dict:
    e = np.eye(3, dtype=complex)
    kraus = [
        np.outer(e[:, 0], e[:, 0]),
        np.outer(e[:, 2], e[:, 2]),
        np.outer(e[:, 0], e[:, 1]) / np.sqrt(2.0),
        np.outer(e[:, 2], e[:, 1]) / np.sqrt(2.0),
    ]
    phi = OperationMap(kraus)
    n = np.diag([1.0, 0.0, -1.0]).astype(complex)
    objects = {
        "Phi": {"kind": "channel", **operation_to_json(phi)},
        "N": {"kind": "operator", "matrix": serialize.matrix_to_json(n)},
    }
    tasks = [
        {"op": "conservation", "channel": "Phi", "operator": "N"},
        {"op": "fixed-points", "channel": "Phi"},
    ]
    return {
        "schema": 1,
        "name": "qutrit-average-vs-full",
        "system_dim": 3,
        "objects": objects,
        "tasks": tasks,
    }


def _builtin_normal_dilation(args: argparse.Namespace) -> dict:
    effects = [
        np.diag([0.7, 0.2, 0.1]).astype(complex),
        np.diag([0.2, 0.6, 0.3]).astype(complex),
        np.diag([0.1, 0.2, 0.6]).astype(complex),
    ]
    b = Observable(["a", "b", "c"], effects)
    inst = luders_instrument(b)
    m = normal_dilation(b)
    n = np.diag([1.0, 0.0, -1.0]).astype(complex)
    objects = {
        "B": {"kind": "observable", **observable_to_json(b)},
        "I": {"kind": "instrument", **instrument_to_json(inst)},
        "M": {"kind": "scheme", **scheme_to_json(m)},
        "N": {
            "kind": "quantity",
            "system": serialize.matrix_to_json(n),
            "apparatus": serialize.matrix_to_json(n),
        },
    }
    tasks = [
        {"op": "repeatability", "scheme": "M"},
        {"op": "post-processing", "instrument": "I"},
        {"op": "fixed-points", "instrument": "I"},
        {"op": "way-bounds", "scheme": "M", "quantity": "N"},
        {"op": "conservation", "scheme": "M", "quantity": "N"},
    ]
    return {
        "schema": 1,
        "name": "normal-dilation",
        "system_dim": 3,
        "objects": objects,
        "tasks": tasks,
    }


def _builtin_conservative_scheme(args: argparse.Namespace) -> dict:
    seed = args.seed
    ds, da = args.sys_dim, args.app_dim
    if ds < 2 or da < 2:
        raise SchemaError("--sys-dim and --app-dim must be at least 2")
    rng = np.random.default_rng(seed)
    vals_s = rng.integers(-1, 2, size=ds)
    while len(set(vals_s.tolist())) == 1:
        vals_s = rng.integers(-1, 2, size=ds)
    vals_a = rng.integers(-1, 2, size=da)
    while len(set(vals_a.tolist())) == 1:
        vals_a = rng.integers(-1, 2, size=da)
    n_sys = np.diag(vals_s.astype(float)).astype(complex)
    n_app = np.diag(vals_a.astype(float)).astype(complex)
    q = AdditiveQuantity(n_sys=n_sys, n_app=n_app)
    u = conservative_unitary(q.composite(), rng, strength=1.5)
    xi = random_state(da, rng, rank=min(2, da))
    if args.aligned:
        pointer = sharp_observable(np.diag(np.arange(float(da))))
    else:
        herm = rng.standard_normal((da, da)) + 1j * rng.standard_normal((da, da))
        pointer = sharp_observable(0.5 * (herm + herm.conj().T))
    m = MeasurementScheme(ds, da, xi, OperationMap([u.mat]), pointer)
    f = sharp_observable(np.diag(np.arange(float(ds))) + 0.0j)
    n_out = len(pointer.outcomes)
    target = Observable(
        list(pointer.outcomes), [np.eye(ds, dtype=complex) / n_out] * n_out
    )
    suffix = "-aligned" if args.aligned else ""
    objects = {
        "M": {"kind": "scheme", **scheme_to_json(m)},
        "F": {"kind": "observable", **observable_to_json(f)},
        "T": {"kind": "observable", **observable_to_json(target)},
        "N": {
            "kind": "quantity",
            "system": serialize.matrix_to_json(n_sys),
            "apparatus": serialize.matrix_to_json(n_app),
        },
    }
    tasks = [
        {"op": "conservation", "scheme": "M", "quantity": "N"},
        {"op": "yanase", "scheme": "M", "quantity": "N"},
        {"op": "way-bounds", "scheme": "M", "quantity": "N"},
        {"op": "disturbance-bounds", "scheme": "M", "observable": "F", "quantity": "N"},
        {"op": "measurability-bounds", "scheme": "M", "target": "T", "quantity": "N"},
        {"op": "fixed-points", "scheme": "M"},
        {"op": "structural", "scheme": "M", "observable": "F", "quantity": "N"},
    ]
    return {
        "schema": 1,
        "name": f"conservative-scheme-{seed}-{ds}x{da}{suffix}",
        "system_dim": ds,
        "objects": objects,
        "tasks": tasks,
    }


def _builtin_rank1_collapse(args: argparse.Namespace) -> dict:
    gamma = args.gamma
    if not 0.0 < gamma < 1.0:
        raise SchemaError(f"--gamma must lie in (0, 1), got {gamma}")
    e = np.eye(3, dtype=complex)
    k0 = [np.outer(e[:, 0], e[:, 0]), np.sqrt(gamma) * np.outer(e[:, 0], e[:, 2])]
    k1 = [
        np.outer(e[:, 1], e[:, 1]),
        np.sqrt(1.0 - gamma) * np.outer(e[:, 1], e[:, 2]),
    ]
    inst = Instrument(["e0", "e1"], [OperationMap(k0), OperationMap(k1)])
    e_obs = inst.induced_observable()
    objects = {
        "I": {"kind": "instrument", **instrument_to_json(inst)},
        "Phi": {"kind": "channel", **operation_to_json(inst.total())},
        "E": {"kind": "observable", **observable_to_json(e_obs)},
    }
    tasks = [
        {"op": "repeatability", "instrument": "I"},
        {"op": "fixed-points", "instrument": "I"},
        {"op": "post-processing", "instrument": "I"},
        {"op": "norm1-observable", "channel": "Phi", "observable": "E"},
    ]
    return {
        "schema": 1,
        "name": f"rank1-collapse-gamma{gamma:g}",
        "system_dim": 3,
        "objects": objects,
        "tasks": tasks,
    }


_BUILTINS = {
    "qubit-luders": _builtin_qubit_luders,
    "qutrit-average-vs-full": _builtin_qutrit_average_vs_full,
    "normal-dilation": _builtin_normal_dilation,
    "conservative-scheme": _builtin_conservative_scheme,
    "rank1-collapse": _builtin_rank1_collapse,
}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    import json

    reports = []
    for path in args.scenario:
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except OSError as exc:
            print(f"error: cannot read {path}: {exc}", file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print(f"error: {path} is not valid JSON: {exc}", file=sys.stderr)
            return 2
        scn, tasks = parse_scenario(obj, args)
        reports.append(run_scenario(scn, tasks))
    payload = reports[0] if len(reports) == 1 else {"schema": 1, "reports": reports}
    _emit(serialize.dumps(payload), args.out)
    if args.csv:
        _write_csv(args.csv, reports)
    if not args.quiet:
        for rep in reports:
            s = rep["summary"]
            print(
                f"{rep['scenario']}: {s['total']} bounds "
                f"({s['violated']} violated, {s['hypothesis_violated']} hypothesis-flagged), "
                f"{s['tasks_failed']} tasks failed",
                file=sys.stderr,
            )
    return max((_report_exit(rep) for rep in reports), default=0)


def cmd_builtin(args: argparse.Namespace) -> int:
    builder = _BUILTINS[args.name]
    scenario = builder(args)
    if args.run:
        scn, tasks = parse_scenario(scenario, args)
        report = run_scenario(scn, tasks)
        _emit(serialize.dumps(report), args.out)
        if args.csv:
            _write_csv(args.csv, [report])
        return _report_exit(report)
    _emit(serialize.dumps(scenario), args.emit)
    return 0


def cmd_suite(args: argparse.Namespace) -> int:
    scenario_args = argparse.Namespace(tol=args.tol, rank_tol=args.rank_tol)
    builders: list[dict] = []
    for lam in (0.1, 0.3, 0.5, 0.7, 0.9):
        builders.append(
            _builtin_qubit_luders(argparse.Namespace(lam=lam))
        )
    builders.append(_builtin_qutrit_average_vs_full(argparse.Namespace()))
    builders.append(_builtin_normal_dilation(argparse.Namespace()))
    builders.append(
        _builtin_conservative_scheme(
            argparse.Namespace(seed=7, sys_dim=2, app_dim=3, aligned=False)
        )
    )
    builders.append(
        _builtin_conservative_scheme(
            argparse.Namespace(seed=11, sys_dim=2, app_dim=3, aligned=True)
        )
    )
    builders.append(_builtin_rank1_collapse(argparse.Namespace(gamma=0.6)))

    reports = []
    for scenario in builders:
        scn, tasks = parse_scenario(scenario, scenario_args)
        reports.append(run_scenario(scn, tasks))

    # cross-validate the spectral fixed-point projector against a long
    # Cesaro average of the qubit measurement channel
    b = Observable(
        ["plus", "minus"],
        [0.5 * (np.eye(2) + 0.5 * _SX), 0.5 * (np.eye(2) - 0.5 * _SX)],
    )
    phi = luders_instrument(b).total()
    analysis = analyze_fixed_points(phi)
    ces = cesaro_supermatrix(phi, 10_000)
    defect = float(op_norm_mat(analysis.projector.m - ces))
    cesaro_ok = defect <= 1e-3

    agg = {
        "scenarios": len(reports),
        "bounds_total": sum(r["summary"]["total"] for r in reports),
        "bounds_violated": sum(r["summary"]["violated"] for r in reports),
        "hypothesis_violated": sum(r["summary"]["hypothesis_violated"] for r in reports),
        "tasks_ok": sum(r["summary"]["tasks_ok"] for r in reports),
        "tasks_failed": sum(r["summary"]["tasks_failed"] for r in reports),
        "cesaro_defect": defect,
        "cesaro_ok": cesaro_ok,
    }
    payload = {"schema": 1, "suite": reports, "summary": agg}
    _emit(serialize.dumps(payload), args.out)
    if args.csv:
        _write_csv(args.csv, reports)
    if not args.quiet:
        print(
            f"suite: {agg['scenarios']} scenarios, {agg['bounds_total']} bounds, "
            f"{agg['bounds_violated']} violated, {agg['tasks_failed']} tasks failed, "
            f"cesaro defect {defect:.2e}",
            file=sys.stderr,
        )
    failed = agg["bounds_violated"] > 0 or agg["tasks_failed"] > 0 or not cesaro_ok
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waylab",
        description="Evaluate measurement-disturbance and conservation-law "
        "trade-offs on finite-dimensional scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate scenario files")
    p_run.add_argument("scenario", nargs="+", help="scenario JSON file(s)")
    _common_flags(p_run)

    p_builtin = sub.add_parser("builtin", help="materialize a named scenario")
    p_builtin.add_argument("name", choices=sorted(_BUILTINS))
    p_builtin.add_argument("--lam", type=float, default=0.5, help="unsharpness parameter")
    p_builtin.add_argument("--gamma", type=float, default=0.6, help="leak weight")
    p_builtin.add_argument("--seed", type=int, default=7)
    p_builtin.add_argument("--sys-dim", type=int, default=2)
    p_builtin.add_argument("--app-dim", type=int, default=3)
    p_builtin.add_argument(
        "--aligned", action="store_true", help="pointer commuting with the apparatus quantity"
    )
    p_builtin.add_argument("--emit", metavar="PATH", help="write the scenario JSON here")
    p_builtin.add_argument("--run", action="store_true", help="evaluate instead of printing")
    _common_flags(p_builtin)

    p_suite = sub.add_parser("suite", help="run the deterministic battery")
    _common_flags(p_suite)
    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="write the report JSON here")
    p.add_argument("--csv", metavar="PATH", help="also write bound rows as CSV")
    p.add_argument("--tol", type=float, default=None, help="override eq_tol")
    p.add_argument("--rank-tol", type=float, default=None, help="override rank_tol")
    p.add_argument("--quiet", action="store_true", help="suppress the stderr summary")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "builtin":
            return cmd_builtin(args)
        return cmd_suite(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
