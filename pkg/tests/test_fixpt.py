import numpy as np
import pytest

from waylab import Observable, Operator, OperationMap, op_norm
from waylab.conserve import AdditiveQuantity
from waylab.cpmaps import apply_dual, apply_map, to_supermatrix
from waylab.fixpt import (
    analyze_fixed_points,
    cesaro_supermatrix,
    check_minimal_support,
    kraus_commutant,
    nondisturbed_norm1_observable,
    post_processing_decomposition,
    structural_necessary_conditions,
)
from waylab.measure import (
    MeasurementScheme,
    collapse_instrument,
    luders_instrument,
    sharp_observable,
)
from waylab.opcore import op_norm_mat

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)

CNOT = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)
SWAP = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)


def unsharp_x(lam):
    plus = (np.eye(2) + lam * SX) / 2.0
    return Observable(["plus", "minus"], [plus, np.eye(2) - plus])


def qutrit_decay_channel():
    e = np.eye(3, dtype=complex)
    k = [
        np.outer(e[:, 0], e[:, 0]),
        np.outer(e[:, 2], e[:, 2]),
        np.outer(e[:, 0], e[:, 1]) / np.sqrt(2.0),
        np.outer(e[:, 2], e[:, 1]) / np.sqrt(2.0),
    ]
    return OperationMap(k)


def leaky_collapse_channel(gamma):
    e = np.eye(3, dtype=complex)
    k = [
        np.outer(e[:, 0], e[:, 0]),
        np.outer(e[:, 1], e[:, 1]),
        np.sqrt(gamma) * np.outer(e[:, 0], e[:, 2]),
        np.sqrt(1.0 - gamma) * np.outer(e[:, 1], e[:, 2]),
    ]
    return OperationMap(k)


def test_fixed_points_unitary_x():
    phi = OperationMap.from_unitary(SX)
    fp = analyze_fixed_points(phi)
    assert fp.fixed_dim == 2
    assert fp.faithful
    assert fp.algebra_certified
    assert fp.commutant_consistent
    assert fp.max_fixed_defect <= 1e-12
    proj = fp.projector.m
    np.testing.assert_allclose(proj @ proj, proj, atol=1e-12)
    np.testing.assert_allclose(fp.rho0.mat, np.eye(2) / 2.0, atol=1e-12)
    np.testing.assert_allclose(fp.support_p.mat, np.eye(2), atol=1e-12)
    # the averaged dual projects onto span{1, x}
    np.testing.assert_allclose(fp.average_dual(SX).mat, SX, atol=1e-12)
    np.testing.assert_allclose(fp.average_dual(SZ).mat, np.zeros((2, 2)), atol=1e-12)


def test_fixed_points_luders_unsharp():
    phi = luders_instrument(unsharp_x(0.5)).total()
    fp = analyze_fixed_points(phi)
    assert fp.fixed_dim == 2
    assert fp.faithful
    assert fp.algebra_certified
    assert fp.commutant_consistent
    plus = (np.eye(2) + SX) / 2.0
    np.testing.assert_allclose(fp.average_dual(plus).mat, plus, atol=1e-12)


def test_fixed_points_qutrit_decay():
    phi = qutrit_decay_channel()
    fp = analyze_fixed_points(phi)
    assert fp.fixed_dim == 2
    assert not fp.faithful
    assert fp.algebra_certified
    assert fp.commutant_consistent is None
    np.testing.assert_allclose(fp.support_p.mat, np.diag([1.0, 0.0, 1.0]), atol=1e-10)
    np.testing.assert_allclose(np.trace(fp.rho0.mat), 1.0, atol=1e-12)
    lem = check_minimal_support(fp, phi)
    assert lem.all_pass
    assert lem.minimality_margin > 0.5


def test_fixed_points_amplitude_damping():
    p = 0.3
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]], dtype=complex)
    phi = OperationMap([k0, k1])
    fp = analyze_fixed_points(phi)
    assert fp.fixed_dim == 1
    assert not fp.faithful
    np.testing.assert_allclose(fp.rho0.mat, P0, atol=1e-12)
    np.testing.assert_allclose(fp.support_p.mat, P0, atol=1e-12)
    lem = check_minimal_support(fp, phi)
    assert lem.all_pass


def test_fixed_points_validation():
    with pytest.raises(ValueError, match="endomorphism"):
        analyze_fixed_points(OperationMap([np.ones((3, 2)) / np.sqrt(3.0)]))
    with pytest.raises(ValueError, match="channel"):
        analyze_fixed_points(OperationMap([0.5 * np.eye(2)]))


def test_kraus_commutant_dephasing():
    phi = OperationMap([np.sqrt(0.5) * np.eye(2), np.sqrt(0.5) * SZ])
    basis = kraus_commutant(phi)
    assert basis.shape == (4, 2)
    for i in range(basis.shape[1]):
        b = basis[:, i].reshape(2, 2, order="F")
        assert op_norm_mat(b @ SZ - SZ @ b) <= 1e-10
    # unital channel: fixed space coincides with the commutant
    fp = analyze_fixed_points(phi)
    assert fp.fixed_dim == 2
    assert fp.commutant_consistent


def test_cesaro_converges_to_projector():
    phi = luders_instrument(unsharp_x(0.5)).total()
    fp = analyze_fixed_points(phi)
    gap_2k = op_norm_mat(cesaro_supermatrix(phi, 2000) - fp.projector.m)
    gap_8k = op_norm_mat(cesaro_supermatrix(phi, 8000) - fp.projector.m)
    assert gap_2k <= 5e-3
    assert gap_8k <= 1.5e-3
    assert gap_8k < gap_2k


def test_structural_conditions_cnot_all_pass():
    pointer = Observable(["z0", "z1"], [P0, P1])
    m = MeasurementScheme(2, 2, Operator(P0), OperationMap([CNOT]), pointer)
    f = sharp_observable(SZ)
    q = AdditiveQuantity(SZ / 2.0, np.zeros((2, 2)))
    rep = structural_necessary_conditions(m, f, q)
    assert rep.average_holds
    assert rep.nondisturbed
    assert rep.first_kind
    assert rep.repeatable
    assert not rep.qubit_support_collapse
    assert rep.support_rank == 2
    for name, cond in rep.conditions.items():
        assert cond.applicable, name
        assert cond.passed, (name, cond.defect)
    assert rep.all_applicable_pass()


def test_structural_conditions_qubit_support_collapse():
    # swap coupling discards the system into the apparatus and preps |0>:
    # the fixed state is rank one, so conditions run on the full space
    pointer = Observable(["z0", "z1"], [P0, P1])
    m = MeasurementScheme(2, 2, Operator(P0), OperationMap([SWAP]), pointer)
    coin = Observable(["t0", "t1"], [0.3 * np.eye(2), 0.7 * np.eye(2)])
    q = AdditiveQuantity(SZ / 2.0, SZ / 2.0)
    rep = structural_necessary_conditions(m, coin, q)
    assert rep.qubit_support_collapse
    assert rep.support_rank == 1
    assert rep.average_holds
    assert rep.nondisturbed  # trivial observables survive any channel
    assert not rep.first_kind
    assert not rep.repeatable
    nd = rep.conditions["nondisturbed-commutes-measured"]
    assert nd.applicable and nd.passed
    assert not rep.conditions["first-kind-commutative"].applicable
    assert rep.all_applicable_pass()


def test_norm1_extraction_luders_unsharp():
    phi = luders_instrument(unsharp_x(0.5)).total()
    res = nondisturbed_norm1_observable(phi, unsharp_x(0.5))
    assert res.observable.outcomes == ("z0", "z1")
    assert res.faithful
    assert res.sharp
    assert res.skipped_outcomes == ()
    plus = (np.eye(2) + SX) / 2.0
    np.testing.assert_allclose(res.observable.effect("z0").mat, plus, atol=1e-10)
    np.testing.assert_allclose(res.observable.effect("z1").mat, np.eye(2) - plus, atol=1e-10)
    assert res.norm_defect <= 1e-10
    assert res.fixed_defect <= 1e-10
    assert res.compression_defect <= 1e-10
    assert res.distinguish_defect <= 1e-10


def test_norm1_extraction_leaky_collapse():
    gamma = 0.6
    phi = leaky_collapse_channel(gamma)
    e = Observable(
        ["x0", "x1"],
        [np.diag([1.0, 0.0, gamma]), np.diag([0.0, 1.0, 1.0 - gamma])],
    )
    res = nondisturbed_norm1_observable(phi, e)
    assert not res.faithful
    assert not res.sharp  # the recovered effects leak into the decaying level
    np.testing.assert_allclose(
        res.observable.effect("z0").mat, np.diag([1.0, 0.0, gamma]), atol=1e-10
    )
    np.testing.assert_allclose(
        res.observable.effect("z1").mat, np.diag([0.0, 1.0, 1.0 - gamma]), atol=1e-10
    )
    assert res.norm_defect <= 1e-10
    assert res.distinguish_defect <= 1e-10
    # the certifying states are routed to their outcome with certainty
    np.testing.assert_allclose(res.states[0].mat, np.diag([1.0, 0.0, 0.0]), atol=1e-10)


def test_norm1_extraction_errors():
    phi = luders_instrument(sharp_observable(SZ)).total()
    coin = Observable(["t0", "t1"], [0.3 * np.eye(2), 0.7 * np.eye(2)])
    with pytest.raises(ValueError, match="trivial"):
        nondisturbed_norm1_observable(phi, coin)
    with pytest.raises(ValueError, match="disturbed"):
        nondisturbed_norm1_observable(phi, unsharp_x(0.5))


def test_post_processing_unsharp_x_frozen():
    lam = 0.5
    inst = luders_instrument(unsharp_x(lam))
    res = post_processing_decomposition(inst)
    assert res.outcomes == ("plus", "minus")
    assert res.sharp
    assert res.faithful
    assert res.reconstruction_defect <= 1e-12
    # columns sorted ascending: z0 carries the minus-heavy column
    np.testing.assert_allclose(res.matrix, [[0.25, 0.75], [0.75, 0.25]], atol=1e-12)
    minus = (np.eye(2) - SX) / 2.0
    np.testing.assert_allclose(res.observable.effect("z0").mat, minus, atol=1e-10)

    # deterministic across repeated runs
    res2 = post_processing_decomposition(inst)
    assert np.array_equal(res.matrix, res2.matrix)
    for x in res.observable.outcomes:
        assert np.array_equal(
            res.observable.effect(x).mat, res2.observable.effect(x).mat
        )


def test_post_processing_errors():
    coin = Observable(["t0", "t1"], [0.3 * np.eye(2), 0.7 * np.eye(2)])
    with pytest.raises(ValueError, match="trivial"):
        post_processing_decomposition(luders_instrument(coin))
    prep = collapse_instrument(
        sharp_observable(SZ), [[1.0, 0.0], [1.0, 0.0]]
    )
    with pytest.raises(ValueError, match="not first-kind"):
        post_processing_decomposition(prep)
