"""Repeatability, first-kindness, and what survives an unsharp measurement.

A measurement is repeatable when running it twice gives the same outcome
with certainty, and of the first kind when outcome statistics are
unchanged by one prior run.  For sharp observables the two coincide; for
unsharp ones they split.  The script walks through:

  * the Lüders measurement of sharp sigma_z: repeatable, first kind, and
    every structural identity holds (including the apparatus-level ones
    when the instrument comes packaged in a dilation scheme),
  * the Lüders measurement of the unsharp x-observable with effects
    (1 +/- sigma_x/2)/2: still first kind, but the repeatability defect is
    substantial,
  * extraction of the norm-1 observable fixed by that unsharp channel:
    the sharp x-basis projections survive the dynamics unchanged and
    perfectly distinguish the output states,
  * the post-processing decomposition of the same instrument: the unsharp
    observable is a classical stochastic smearing of the recovered sharp
    one, and the smearing matrix is reported exactly.
"""

import numpy as np

from waylab.fixpt import nondisturbed_norm1_observable, post_processing_decomposition
from waylab.measure import (
    Observable,
    luders_instrument,
    normal_dilation,
    repeatability_report,
    sharp_observable,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def show_items(rep):
    for name, item in rep.items.items():
        status = f"defect {item.defect:.2e}" if item.evaluated else "not evaluated"
        print(f"    {name:<28} {status}")


def main():
    z_obs = sharp_observable(SZ)
    scheme = normal_dilation(z_obs)
    rep = repeatability_report(luders_instrument(z_obs), scheme)
    print("Lüders measurement of sharp sigma_z (with its dilation scheme)")
    print(f"  repeatable {rep.repeatable}  first kind {rep.first_kind}"
          f"  sharp equivalence holds {rep.sharp_equivalence_ok}")
    show_items(rep)
    print()

    plus = (np.eye(2) + 0.5 * SX) / 2.0
    b_obs = Observable(["plus", "minus"], [plus, np.eye(2) - plus])
    inst = luders_instrument(b_obs)
    rep_u = repeatability_report(inst)
    print("Lüders measurement of the unsharp x-observable (lam = 0.5)")
    print(f"  first kind {rep_u.first_kind} (defect {rep_u.first_kind_defect:.2e})")
    print(f"  repeatable {rep_u.repeatable}"
          f" (defect {rep_u.repeatability_defect:.4f},"
          f" per outcome {dict((k, round(v, 4)) for k, v in rep_u.per_outcome_defects.items())})")
    print()

    res = nondisturbed_norm1_observable(inst.total(), b_obs)
    print("norm-1 observable fixed by the unsharp measurement channel")
    for x in res.observable.outcomes:
        print(f"  G({x}) =\n{np.round(res.observable.effect(x).mat.real, 10)}")
    print(f"  fixed-point defect {res.fixed_defect:.2e},"
          f" output distinguishability defect {res.distinguish_defect:.2e}")
    print()

    dec = post_processing_decomposition(inst)
    print("post-processing decomposition of the same instrument")
    print(f"  recovered sharp observable: {dec.sharp},"
          f" reconstruction defect {dec.reconstruction_defect:.2e}")
    print(f"  smearing matrix (rows: observed outcome, columns: sharp outcome)\n"
          f"{np.round(dec.matrix, 12)}")
    print("  each observed effect is the matching stochastic mix of the sharp ones")


if __name__ == "__main__":
    main()
