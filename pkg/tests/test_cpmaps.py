import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waylab.cpmaps import (
    OperationMap,
    apply_dual,
    apply_map,
    check_multiplicability,
    commutator_defect_bound,
    compose,
    compress,
    dual_view,
    operation_from_json,
    operation_to_json,
    psd_leq,
    sesquilinear,
    to_supermatrix,
    unvec,
    vec,
)
from waylab.opcore import DEFAULT_TOL, Operator, commutator, op_norm, psd_sqrt
from waylab.rand import random_channel, random_hermitian, random_state
from waylab.serialize import SchemaError

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _amplitude_damping(gamma):
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return OperationMap([k0, k1])


def test_vec_column_stacking():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_allclose(vec(m), [1.0, 3.0, 2.0, 4.0])
    np.testing.assert_allclose(unvec(vec(m), 2), m)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_vec_sandwich_identity(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3))
    np.testing.assert_allclose(vec(a @ b @ c), np.kron(c.T, a) @ vec(b), atol=1e-12)


def test_operation_map_validation():
    with pytest.raises(ValueError):
        OperationMap([])
    with pytest.raises(ValueError):
        OperationMap([np.eye(2), np.eye(3)])
    half = OperationMap([np.eye(2) / np.sqrt(2.0)])
    assert half.is_operation(DEFAULT_TOL)
    assert not half.is_channel(DEFAULT_TOL)
    over = OperationMap([np.eye(2) * 1.1])
    assert not over.is_operation(DEFAULT_TOL)


def test_amplitude_damping_channel_flags():
    phi = _amplitude_damping(0.3)
    assert phi.is_channel(DEFAULT_TOL)
    assert not phi.is_unital(DEFAULT_TOL)
    assert OperationMap.identity(2).is_unital(DEFAULT_TOL)
    assert OperationMap.from_unitary(SX).is_unital(DEFAULT_TOL)


def test_apply_map_and_dual_agree_with_definition():
    phi = _amplitude_damping(0.4)
    rho = np.diag([0.2, 0.8]).astype(complex)
    out = apply_map(phi, rho)
    expected = sum(k @ rho @ k.conj().T for k in phi.kraus)
    np.testing.assert_allclose(out.mat, expected, atol=1e-14)
    a = SX + np.eye(2)
    np.testing.assert_allclose(
        apply_dual(phi, a).mat, sum(k.conj().T @ a @ k for k in phi.kraus), atol=1e-14
    )


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_duality_pairing(seed):
    rng = np.random.default_rng(seed)
    phi = random_channel(3, 2, 3, rng)
    rho = random_state(3, rng)
    a = random_hermitian(2, rng)
    lhs = np.trace(a.mat @ apply_map(phi, rho).mat)
    rhs = np.trace(apply_dual(phi, a).mat @ rho.mat)
    assert lhs == pytest.approx(rhs, abs=1e-11)


def test_supermatrix_sigmax_spectrum():
    m = to_supermatrix(OperationMap.from_unitary(SX)).m
    w = np.sort(np.linalg.eigvals(m).real)
    np.testing.assert_allclose(w, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)


def test_supermatrix_reproduces_dual_action():
    phi = _amplitude_damping(0.25)
    sm = to_supermatrix(phi)
    a = np.array([[0.3, 1.0j], [-1.0j, 0.7]])
    np.testing.assert_allclose(sm.apply_dual_vec(a), apply_dual(phi, a).mat, atol=1e-13)
    rho = np.diag([0.6, 0.4]).astype(complex)
    np.testing.assert_allclose(sm.apply_state_vec(rho), apply_map(phi, rho).mat, atol=1e-13)


def test_sesquilinear_vanishes_for_unitary():
    phi = OperationMap.from_unitary(SX)
    rng = np.random.default_rng(9)
    a = random_hermitian(2, rng)
    b = random_hermitian(2, rng)
    assert op_norm(sesquilinear(phi, a, b)) <= 1e-13


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_sesquilinear_cauchy_schwarz(seed):
    # <<A|B>><<B|A>> <= ||<<B|B>>|| <<A|A>> in the semidefinite order
    rng = np.random.default_rng(seed)
    phi = random_channel(3, 3, 2, rng)
    a = random_hermitian(3, rng)
    b = random_hermitian(3, rng)
    ab = sesquilinear(phi, a, b)
    lhs = ab @ ab.H
    rhs = op_norm(sesquilinear(phi, b, b)) * sesquilinear(phi, a, a)
    assert psd_leq(lhs, rhs, DEFAULT_TOL.with_eq_tol(1e-9))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_commutator_defect_bound_holds(seed):
    rng = np.random.default_rng(seed)
    phi = random_channel(3, 3, 3, rng)
    a = random_hermitian(3, rng)
    b = random_hermitian(3, rng)
    rep = commutator_defect_bound(phi, a, b)
    lhs = op_norm(
        commutator(apply_dual(phi, a), apply_dual(phi, b)) - apply_dual(phi, commutator(a, b))
    )
    assert rep.lhs == pytest.approx(lhs, abs=1e-12)
    assert rep.satisfied
    assert rep.slack >= -1e-9


def test_commutator_defect_bound_zero_for_unitary():
    rng = np.random.default_rng(3)
    phi = OperationMap.from_unitary(SX)
    rep = commutator_defect_bound(phi, random_hermitian(2, rng), random_hermitian(2, rng))
    assert rep.lhs <= 1e-12
    assert rep.rhs <= 1e-10


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_second_moment_defect_inequality(seed):
    # ||Phi*(A^2) - Phi*(A)^2|| <= 2||Phi*(A) - B|| + ||B - B^2|| for effects
    rng = np.random.default_rng(seed)
    phi = random_channel(3, 3, 2, rng)
    w = rng.uniform(0.0, 1.0, size=3)
    a = Operator(np.diag(w).astype(complex))
    u = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    q, _ = np.linalg.qr(u)
    b = Operator(q @ np.diag(rng.uniform(0.0, 1.0, size=3)) @ q.conj().T)
    lhs = op_norm(apply_dual(phi, a @ a) - apply_dual(phi, a) @ apply_dual(phi, a))
    rhs = 2.0 * op_norm(apply_dual(phi, a) - b) + op_norm(b - b @ b)
    assert lhs <= rhs + 1e-10


def test_operation_annihilation():
    # a positive operator killed by the dual also absorbs arbitrary factors:
    # I*(A) = 0 with A >= 0 forces I*(AB) = I*(BA) = 0
    rng = np.random.default_rng(12)
    k = np.zeros((3, 3), dtype=complex)
    k[:2, :2] = rng.standard_normal((2, 2))
    k /= 2.0 * np.linalg.norm(k, 2)
    op = OperationMap([k])
    a = np.diag([0.0, 0.0, 1.0]).astype(complex)
    assert op_norm(apply_dual(op, a)) <= 1e-14
    for _ in range(5):
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert op_norm(apply_dual(op, a @ b)) <= 1e-13
        assert op_norm(apply_dual(op, b @ a)) <= 1e-13


def test_multiplicability_sharp_vs_unsharp():
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    luders_sharp = OperationMap([p0, p1])
    res = check_multiplicability(luders_sharp, p0)
    assert res.applicable and res.holds
    assert res.witness <= 1e-12

    lam = 0.5
    bp = psd_sqrt(0.5 * (np.eye(2) + lam * SX)).mat
    bm = psd_sqrt(0.5 * (np.eye(2) - lam * SX)).mat
    luders_unsharp = OperationMap([bp, bm])
    # the dual is multiplicative on the commutative algebra generated by B
    res2 = check_multiplicability(luders_unsharp, 0.5 * (np.eye(2) + lam * SX))
    assert res2.applicable and res2.holds
    # but not at a sigma_z projector, whose image is no longer a projection
    res3 = check_multiplicability(luders_unsharp, p0)
    assert not res3.applicable
    assert res3.precondition_defect > 1e-3


def test_compose_and_dual_view():
    phi = _amplitude_damping(0.5)
    ident = OperationMap.identity(2)
    both = compose(phi, ident)
    rho = np.diag([0.1, 0.9]).astype(complex)
    np.testing.assert_allclose(apply_map(both, rho).mat, apply_map(phi, rho).mat, atol=1e-14)
    dual = dual_view(phi)
    a = SX + 2.0 * np.eye(2)
    np.testing.assert_allclose(apply_map(dual, a).mat, apply_dual(phi, a).mat, atol=1e-14)


def test_compress_drops_redundant_kraus():
    phi = _amplitude_damping(0.3)
    padded = OperationMap(list(phi.kraus) + [np.zeros((2, 2))] * 3)
    slim = compress(padded)
    assert len(slim.kraus) == 2
    rho = np.array([[0.5, 0.2], [0.2, 0.5]], dtype=complex)
    np.testing.assert_allclose(apply_map(slim, rho).mat, apply_map(phi, rho).mat, atol=1e-12)


def test_psd_leq():
    assert psd_leq(np.diag([0.5, 0.5]), np.eye(2))
    assert not psd_leq(np.diag([1.5, 0.5]), np.eye(2))


def test_operation_json_round_trip():
    phi = _amplitude_damping(0.7)
    back = operation_from_json(operation_to_json(phi))
    for k1, k2 in zip(phi.kraus, back.kraus):
        np.testing.assert_allclose(k1, k2)
    with pytest.raises(SchemaError, match="kraus"):
        operation_from_json({"kraus": "nope"})
