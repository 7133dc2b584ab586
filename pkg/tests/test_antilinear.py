import numpy as np
import pytest
from hypothesis import given, strategies as st

from momext.antilinear import (
    Conjugation,
    antilinear_product_matrix,
    apply,
    compose_JC,
    conjugate_by_unitary,
    inner,
    random_conjugation,
    validate,
)
from momext.errors import DimensionMismatch, NotAConjugation, NotUnitary
from momext.numerics import fro, haar_unitary, unitarity_defect


def _vec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


@given(st.integers(1, 32), st.integers(0, 2**32 - 1))
def test_conjugation_axioms(n, seed):
    rng = np.random.default_rng(seed)
    J = random_conjugation(n, rng)
    x, y = _vec(rng, n), _vec(rng, n)
    assert np.linalg.norm(J(J(x)) - x) < 1e-12 * np.linalg.norm(x) * n
    assert abs(inner(J(x), J(y)) - inner(y, x)) < 1e-11 * np.linalg.norm(x) * np.linalg.norm(y)
    a = 0.3 - 1.7j
    assert np.allclose(J(a * x), np.conj(a) * J(x))


def test_inner_is_linear_in_first_slot():
    x = np.array([1.0, 0.0])
    assert inner(2j * x, x) == 2j
    assert inner(x, 2j * x) == -2j


def test_plain_conjugation():
    J = Conjugation.plain(3)
    x = np.array([1 + 2j, -1j, 3.0])
    assert np.array_equal(J(x), x.conj())
    assert validate(J).passed


def test_rejects_non_symmetric_and_non_unitary():
    with pytest.raises(NotAConjugation):
        Conjugation(np.array([[0, 1], [-1, 0]], dtype=complex))
    with pytest.raises(NotAConjugation):
        Conjugation(2 * np.eye(2))
    rep = validate(np.array([[0, 1], [-1, 0]]))
    assert not rep.passed and rep.symmetry_defect == pytest.approx(2 * np.sqrt(2))


def test_small_defects_are_repaired(rng):
    M = random_conjugation(5, rng).matrix + 1e-9 * rng.normal(size=(5, 5))
    J = Conjugation(M)
    assert validate(J).passed
    assert fro(J.matrix - M) < 1e-8


def test_matrix_is_read_only(rng):
    J = random_conjugation(3, rng)
    with pytest.raises(ValueError):
        J.matrix[0, 0] = 1


def test_apply_dimension_check():
    with pytest.raises(DimensionMismatch):
        apply(Conjugation.plain(2), np.ones(3))


def test_product_of_two_conjugations_is_unitary(rng):
    J, C = random_conjugation(6, rng), random_conjugation(6, rng)
    U = compose_JC(J, C)
    assert unitarity_defect(U) < 1e-12
    x = _vec(rng, 6)
    assert np.allclose(U @ x, J(C(x)))


def test_compose_dimension_check():
    with pytest.raises(DimensionMismatch):
        compose_JC(Conjugation.plain(2), Conjugation.plain(3))


def test_conjugate_by_unitary(rng):
    J = random_conjugation(4, rng)
    V = haar_unitary(4, rng)
    K = conjugate_by_unitary(J, V)
    x = _vec(rng, 4)
    assert np.allclose(K(x), V @ J(V.conj().T @ x))
    with pytest.raises(NotUnitary):
        conjugate_by_unitary(J, 2 * np.eye(4))


def test_odd_products(rng):
    A, B, C = (random_conjugation(3, rng) for _ in range(3))
    N = antilinear_product_matrix(A, B, C)
    x = _vec(rng, 3)
    assert np.allclose(N @ x.conj(), A(B(C(x))))
    with pytest.raises(ValueError):
        antilinear_product_matrix(A, B)
