"""Bound-report records shared by the inequality evaluators.

A :class:`BoundReport` freezes one evaluated inequality: identifier, outcome
label (or label pair), both sides, the slack ``rhs - lhs``, whether the
inequality holds within ``eq_tol``, and whether the statement's hypotheses
were met by the inputs.  Reports whose hypotheses fail are still informative
but are never counted as violations by the summary or the CLI exit code.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from typing import Any, Iterable

import numpy as np

from .opcore import DEFAULT_TOL, Operator, Tolerance

__all__ = ["BoundReport", "make_report", "digest_inputs", "summarize"]


@dataclasses.dataclass(frozen=True)
class BoundReport:
    bound_id: str
    outcome: str
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    hypothesis_satisfied: bool
    hypothesis: str
    inputs_digest: str

    def to_dict(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "outcome": self.outcome,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "satisfied": self.satisfied,
            "hypothesis_satisfied": self.hypothesis_satisfied,
            "hypothesis": self.hypothesis,
            "inputs_digest": self.inputs_digest,
        }


def make_report(
    bound_id: str,
    outcome: str,
    lhs: float,
    rhs: float,
    tol: Tolerance = DEFAULT_TOL,
    digest: str = "",
    hypothesis_satisfied: bool = True,
    hypothesis: str = "",
) -> BoundReport:
    lhs = float(lhs)
    rhs = float(rhs)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise ValueError(f"{bound_id}: non-finite bound sides lhs={lhs} rhs={rhs}")
    slack = rhs - lhs
    return BoundReport(
        bound_id=bound_id,
        outcome=outcome,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        satisfied=bool(slack >= -tol.eq_tol),
        hypothesis_satisfied=bool(hypothesis_satisfied),
        hypothesis=hypothesis,
        inputs_digest=digest,
    )


def _feed(h: "hashlib._Hash", item: Any) -> None:
    if item is None:
        h.update(b"\x00none")
    elif isinstance(item, str):
        h.update(b"\x01s" + item.encode("utf-8"))
    elif isinstance(item, bool):
        h.update(b"\x02b" + (b"1" if item else b"0"))
    elif isinstance(item, (int, float, complex)):
        h.update(b"\x03n" + repr(item).encode("ascii"))
    elif isinstance(item, Operator):
        arr = np.ascontiguousarray(item.mat)
        h.update(b"\x04m" + str(arr.shape).encode("ascii") + arr.tobytes())
    elif isinstance(item, np.ndarray):
        arr = np.ascontiguousarray(np.asarray(item, dtype=complex))
        h.update(b"\x04m" + str(arr.shape).encode("ascii") + arr.tobytes())
    elif isinstance(item, (list, tuple)):
        h.update(b"\x05l" + str(len(item)).encode("ascii"))
        for sub in item:
            _feed(h, sub)
    else:
        raise TypeError(f"cannot digest object of type {type(item).__name__}")


def digest_inputs(*items: Any) -> str:
    """Short stable hash of the numeric inputs behind a batch of reports."""
    h = hashlib.sha256()
    for item in items:
        _feed(h, item)
    return h.hexdigest()[:12]


def summarize(reports: Iterable[BoundReport]) -> dict:
    total = satisfied = violated = hypothesis_violated = 0
    for r in reports:
        total += 1
        if not r.hypothesis_satisfied:
            hypothesis_violated += 1
        elif r.satisfied:
            satisfied += 1
        else:
            violated += 1
    return {
        "total": total,
        "satisfied": satisfied,
        "violated": violated,
        "hypothesis_violated": hypothesis_violated,
    }
