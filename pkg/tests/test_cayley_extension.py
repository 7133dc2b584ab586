import numpy as np
import pytest
from hypothesis import given, strategies as st

from momext.antilinear import Conjugation
from momext.cayley_extension import (
    CommutingTupleInstance,
    PartialSymmetricOperator,
    build_extension,
    cayley,
    cayley_matrix,
    generate_instance,
    inverse_cayley,
    rotate_instance,
    validate_hypotheses,
)
from momext.errors import EigenvalueOne, HypothesisViolation, InvalidShape, NotSymmetric, RealShift
from momext.numerics import Subspace, dagger, fro, haar_unitary, random_hermitian, unitarity_defect

E1 = np.array([[1.0], [0.0]], dtype=complex)


def theta_tuple(theta, J=None):
    A1 = PartialSymmetricOperator(2, Subspace(2, E1), E1.copy())
    return CommutingTupleInstance(2, A1, [], [np.diag([1.0, np.exp(1j * theta)])], J, 1j)


def test_cayley_of_zero():
    d = cayley(PartialSymmetricOperator.total(np.zeros((1, 1))), 1j)
    assert d.H1.dim == d.H3.dim == 1 and d.H2.dim == 0
    assert np.allclose(d.V1, [[-1]])


def test_cayley_two_dim_example():
    d = cayley(PartialSymmetricOperator(2, Subspace(2, E1), E1.copy()), 1j)
    assert (d.H1.dim, d.H2.dim, d.H3.dim, d.H4.dim) == (1, 1, 1, 1)
    assert abs(abs(d.H2.basis[1, 0]) - 1) < 1e-14 and abs(abs(d.H4.basis[1, 0]) - 1) < 1e-14
    assert np.allclose(d.V1 @ E1[:, 0], 1j * E1[:, 0])


def test_cayley_errors():
    with pytest.raises(RealShift):
        cayley(PartialSymmetricOperator.total(np.eye(2)), 2.0)
    with pytest.raises(NotSymmetric):
        cayley(PartialSymmetricOperator.total(np.array([[0, 1], [0, 0]], dtype=complex)), 1j)


@given(st.integers(2, 16), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_deficiency_dimensions(n, codim, seed):
    codim = min(codim, n - 1)
    T = generate_instance(n, codim, 1, 0, seed)
    d = cayley(T.A1, T.z0)
    assert d.H2.dim == d.H4.dim == codim
    assert fro(d.H1.projector() + d.H2.projector() - np.eye(n)) < 1e-10
    # V1 isometric on H1 and maps it onto H3
    img = d.V1 @ d.H1.basis
    assert fro(dagger(img) @ img - np.eye(d.H1.dim)) < 1e-10
    assert d.H3.residual(img) < 1e-10
    X1 = T.A1.action - T.z0 * T.A1.domain.basis
    X3 = T.A1.action - np.conj(T.z0) * T.A1.domain.basis
    assert fro(d.V1 @ X1 - X3) < 1e-10 * max(fro(X3), 1)


def test_inverse_cayley_examples():
    assert np.allclose(inverse_cayley(-np.eye(2), 1j), 0)
    assert np.allclose(inverse_cayley(np.array([[1j]]), 1j), [[1]])
    with pytest.raises(EigenvalueOne):
        inverse_cayley(np.eye(1), 1j)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.sampled_from([1j, 2j, 0.5 + 1j, -1 - 0.3j]))
def test_cayley_round_trip(n, seed, z0):
    rng = np.random.default_rng(seed)
    A = random_hermitian(n, rng)
    W = cayley_matrix(A, z0)
    assert unitarity_defect(W) < 1e-11
    assert fro(inverse_cayley(W, z0) - A) < 1e-10 * max(fro(A), 1)


def test_diagonal_instance_has_tiny_defects():
    A1 = PartialSymmetricOperator(3, Subspace(3, np.eye(3)[:, :2]), np.diag([1.0, 2.0, 0])[:, :2])
    T = CommutingTupleInstance(3, A1, [np.diag([0.5, -1.0, 3.0])], [np.diag([1j, -1, np.exp(0.7j)])])
    rep = validate_hypotheses(T)
    assert rep.passed
    assert max(c.defect for c in rep.checks) <= 1e-12


def test_violating_instance_reports_defect():
    flip = Conjugation(np.array([[0, 1], [1, 0]]))
    rep = validate_hypotheses(theta_tuple(np.pi / 3, flip))
    assert not rep.passed
    assert rep.defect("B1 J = J B1^-1") > 0.1
    assert "B1 J = J B1^-1" in rep.summary()
    with pytest.raises(HypothesisViolation) as exc:
        build_extension(theta_tuple(np.pi / 3, flip))
    assert exc.value.report is not None


@pytest.mark.parametrize("theta", [np.pi / 3, np.pi / 2, 3 * np.pi / 2, 1.0, 5.5])
def test_theta_family(theta):
    res = build_extension(theta_tuple(theta))
    expected = np.diag([1.0, -1.0 / np.tan(theta / 2)])
    assert fro(res.A1_hat - expected) < 1e-10
    assert res.defects["extension"] < 1e-12


def test_theta_zero_raises():
    with pytest.raises(EigenvalueOne, match="deficiency"):
        build_extension(theta_tuple(0.0))


def test_codim_zero_returns_A1():
    T = generate_instance(4, 0, 2, 0, seed=1)
    res = build_extension(T)
    assert res.deficiency is None
    assert fro(res.A1_hat - T.A1.matrix()) < 1e-14


def test_generated_instances_validate():
    assert validate_hypotheses(generate_instance(8, 2, 2, 1, seed=7)).passed
    assert validate_hypotheses(generate_instance(2, 1, 1, 1, seed=7)).passed
    with pytest.raises(InvalidShape):
        generate_instance(3, 3, 1, 0, seed=0)


@given(
    st.integers(3, 16), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2),
    st.integers(0, 2**32 - 1),
)
def test_extension_battery_in_rotated_bases(n, codim, rho, tau, seed):
    codim = min(codim, n - 1)
    T = generate_instance(n, codim, rho, tau, seed)
    T = rotate_instance(T, haar_unitary(n, np.random.default_rng(seed + 1)))
    res = build_extension(T)
    A = res.A1_hat
    assert res.defects["extension"] < 1e-9
    assert fro(A - dagger(A)) <= 1e-9 * fro(A)
    for X in T.A_rest + T.B_list:
        assert fro(A @ X - X @ A) <= 1e-8 * fro(A) * fro(X)


def test_validated_instances_satisfy_reflection_identities(rng):
    T = rotate_instance(generate_instance(10, 3, 2, 2, seed=4), haar_unitary(10, rng))
    d = cayley(T.A1, T.z0)
    for B in T.B_list:
        assert fro(B @ d.V1 @ d.H1.basis - d.V1 @ B @ d.H1.basis) < 1e-10
        for _ in range(5):
            x = rng.normal(size=10) + 1j * rng.normal(size=10)
            # B J x = J B^{-1} x
            lhs = B @ (T.J.matrix @ x.conj())
            rhs = T.J.matrix @ (dagger(B) @ x).conj()
            assert np.linalg.norm(lhs - rhs) < 1e-10 * np.linalg.norm(x)


def test_partial_operator_accessors():
    A = PartialSymmetricOperator(2, Subspace(2, E1), 3 * E1)
    assert not A.is_total
    assert np.allclose(A.matrix(), np.diag([3, 0]))
    assert np.allclose(A.compression(), [[3]])
    assert np.allclose(A.apply(np.array([2.0, 0])), [6, 0])
    assert A.symmetry_defect() == 0
