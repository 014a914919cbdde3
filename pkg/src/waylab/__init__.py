"""Finite-dimensional toolkit for quantitative measurement theory.

The package is organized around a small dense-matrix core:

``opcore``
    operators, tolerances, tensor/partial-trace plumbing.
``cpmaps``
    Kraus-form operations and channels, duals, supermatrices, and the
    sesquilinear defect map that drives most of the inequalities.
``measure``
    observables, instruments, measurement schemes, restriction maps,
    dilations, and repeatability diagnostics.
``conserve``
    additive conserved quantities, conservation checks, variance and
    quantum Fisher information of the apparatus preparation.
``bounds``
    quantitative disturbance / measurement-error / distinguishability
    trade-off bounds evaluated as BoundReport records.
``fixpt``
    fixed-point structure of measurement channels: spectral projector,
    minimal support, restricted fixed-point algebra, norm-1 observables
    and classical post-processing decompositions.
``cli``
    the ``waylab`` command-line entry point (run / builtin / suite).
"""

from .opcore import (
    Operator,
    Tolerance,
    DEFAULT_TOL,
    commutator,
    eigenspace_projector,
    fidelity,
    op_norm,
    partial_trace,
    psd_sqrt,
    tensor,
)
from .cpmaps import OperationMap, SuperMatrix
from .measure import Observable, Instrument, MeasurementScheme

__all__ = [
    "Operator",
    "Tolerance",
    "DEFAULT_TOL",
    "commutator",
    "eigenspace_projector",
    "fidelity",
    "op_norm",
    "partial_trace",
    "psd_sqrt",
    "tensor",
    "OperationMap",
    "SuperMatrix",
    "Observable",
    "Instrument",
    "MeasurementScheme",
]

__version__ = "0.1.0"
