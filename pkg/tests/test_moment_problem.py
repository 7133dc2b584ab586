import numpy as np
import pytest
from hypothesis import given, strategies as st

from momext.cayley_extension import validate_hypotheses
from momext.errors import ConditionBFailed, IncompleteTable, InputError, NotFlat, NotPSD
from momext.moment_problem import (
    AtomicMeasure,
    MomentTable,
    assemble_operators,
    box_indices,
    check_condition_B,
    check_positivity,
    gns_construct,
    gram_matrix,
    match_atoms,
    moments_from_measure,
    random_atomic_measure,
    random_flat_instance,
    reachable_indices,
    solve,
    solve_detailed,
    verify_solution,
    wrap_angle,
)
from momext.numerics import dagger, fro, hermitian_eig

seeds = st.integers(0, 2**32 - 1)


def dirac(x=(0.0,), phi=(0.0,)):
    return AtomicMeasure.from_atoms(len(x), len(phi), [(x, phi, 1.0)])


TWO = AtomicMeasure.from_atoms(1, 1, [((1.0,), (0.0,), 0.5), ((-1.0,), (np.pi / 2,), 0.5)])


def test_dirac_moments():
    S = moments_from_measure(dirac(), (1,), (1,))
    for (m, n), v in S.entries.items():
        assert v == (1 if m == (0,) else 0)


def test_two_atom_moments_match_closed_form():
    S = moments_from_measure(TWO, (3,), (3,))
    for (m, n), v in S.entries.items():
        assert abs(v - 0.5 * (1 + (-1) ** m[0] * 1j ** n[0])) < 1e-14


@given(st.integers(1, 2), st.integers(0, 2), st.integers(1, 5), seeds)
def test_total_mass(r, l, k, seed):
    mu = random_atomic_measure(np.random.default_rng(seed), r, l, k)
    S = moments_from_measure(mu, (1,) * r, (1,) * l)
    assert abs(S.mass - mu.weights.sum()) < 1e-13


def test_table_validation():
    with pytest.raises(InputError):
        MomentTable(1, 1, (1,), (1,), {((0,), (1,)): 1j, ((0,), (-1,)): 1j})
    with pytest.raises(InputError):
        MomentTable(1, 1, (1, 2), (1,), {})
    S = MomentTable(1, 0, (1,), (), {((0,), ()): 1.0})
    assert len(S.missing()) == 4
    with pytest.raises(IncompleteTable):
        gram_matrix(S)


def test_measure_validation():
    with pytest.raises(InputError):
        AtomicMeasure(1, 1, [[0.0]], [[np.pi]], [1.0])
    with pytest.raises(InputError):
        AtomicMeasure(1, 1, [[0.0]], [[0.0]], [0.0])
    assert wrap_angle(np.pi) == -np.pi


def test_gram_dirac():
    G = gram_matrix(moments_from_measure(dirac(), (1,), (1,)))
    idx = box_indices((1,), (1,))
    for a, (m, _) in enumerate(idx):
        for b, (k, _) in enumerate(idx):
            assert G[a, b] == (1 if m == k == (0,) else 0)
    assert np.linalg.matrix_rank(G) == 1


@given(st.integers(1, 2), st.integers(0, 2), st.integers(1, 5), seeds)
def test_gram_hermitian_and_rank(r, l, k, seed):
    mu, S = random_flat_instance(np.random.default_rng(seed), r, l, k)
    G = gram_matrix(S)
    assert fro(G - dagger(G)) <= 1e-12
    lam = hermitian_eig(G)[0]
    assert int(np.sum(lam > 1e-10 * lam[-1])) == k


def test_positivity_certificate():
    idx = MomentTable(1, 1, (1,), (1,), {}).required_indices()
    S = MomentTable(1, 1, (1,), (1,), {ix: (-1.0 if ix == ((0,), (0,)) else 0.0) for ix in idx})
    rep = check_positivity(S)
    assert not rep.passed
    terms = rep.certificate_terms()
    assert list(terms) == [((0,), (0,))]
    assert abs(abs(terms[((0,), (0,))]) - 1) < 1e-14
    with pytest.raises(NotPSD):
        solve(S)


def test_positivity_dirac():
    rep = check_positivity(moments_from_measure(dirac(), (1,), (1,)))
    assert rep.passed and abs(rep.min_eigenvalue) < 1e-14


@given(st.integers(1, 2), st.integers(0, 2), st.integers(1, 6), seeds)
def test_necessity(r, l, k, seed):
    rng = np.random.default_rng(seed)
    mu = random_atomic_measure(rng, r, l, k)
    S = moments_from_measure(mu, (1,) * r, (1,) * l)
    assert check_positivity(S).passed
    rep = check_condition_B(S)
    assert rep.passed
    for j, c in rep.constants.items():
        assert c <= np.max(mu.x[:, j - 1] ** 2) + 1e-8


def test_condition_B_examples():
    S = moments_from_measure(AtomicMeasure.from_atoms(2, 0, [((2.0, 3.0), (), 1.0)]), (1, 1), ())
    rep = check_condition_B(S, j0=1)
    assert rep.constants[2] == pytest.approx(9, abs=1e-10)
    assert check_condition_B(S, j0=2).constants[1] == pytest.approx(4, abs=1e-10)
    assert check_condition_B(moments_from_measure(TWO, (1,), (1,))).constants == {}
    with pytest.raises(InputError):
        check_condition_B(S, j0=3)


def test_condition_B_failure_is_detected():
    # x_2-moments that no measure could produce: G is zero on the e_2
    # direction of the box but the shifted form is not.
    mu = AtomicMeasure.from_atoms(2, 0, [((0.5, 0.0), (), 1.0)])
    S = moments_from_measure(mu, (1, 1), ())
    entries = dict(S.entries)
    entries[((0, 2), ())] = 0.0
    entries[((0, 4), ())] = 1.0
    bad = MomentTable(2, 0, (1, 1), (), entries)
    rep = check_condition_B(bad)
    assert not rep.passed and rep.constants[2] == float("inf")
    with pytest.raises(ConditionBFailed):
        solve(bad)


def test_gns_dirac():
    G = gns_construct(moments_from_measure(dirac(), (1,), (1,)))
    assert G.dim == 1
    for (m, n), v in G.coord_map.items():
        if m == (0,):
            assert np.allclose(v, G.y0)
        else:
            assert np.allclose(v, 0)


@given(st.integers(1, 2), st.integers(0, 2), st.integers(1, 5), seeds)
def test_gns_gram_identity(r, l, k, seed):
    rng = np.random.default_rng(seed)
    mu, S = random_flat_instance(rng, r, l, k)
    G = gns_construct(S)
    assert G.dim == k
    idx = G.indices
    for _ in range(20):
        a, b = rng.integers(len(idx), size=2)
        (m, n), (p, q) = idx[a], idx[b]
        s = S.get(tuple(u + v for u, v in zip(m, p)), tuple(u - v for u, v in zip(n, q)))
        assert abs(np.vdot(G.coords[:, b], G.coords[:, a]) - s) < 1e-9 * abs(S.mass)
    # coordinates are real for the reflection y[m, n] -> y[m, -n]
    refl = G.reflection()
    assert np.abs(G.coords[:, refl] - G.coords.conj()).max() < 1e-9 * np.sqrt(abs(S.mass))


def test_assemble_dirac():
    x0, phi0 = 0.7, -1.2
    T = assemble_operators(gns_construct(moments_from_measure(dirac((x0,), (phi0,)), (1,), (1,))))
    assert np.allclose(T.A1.matrix(), [[x0]])
    assert np.allclose(T.B_list[0], [[np.exp(1j * phi0)]])
    assert np.allclose(T.J.matrix, [[1]])


@given(st.integers(1, 2), st.integers(1, 2), st.integers(2, 5), seeds)
def test_assembled_tuple(r, l, k, seed):
    rng = np.random.default_rng(seed)
    mu, S = random_flat_instance(rng, r, l, k)
    G = gns_construct(S)
    T = assemble_operators(G, S)
    A = [T.A1.matrix()] + T.A_rest
    ops = A + T.B_list
    for X in ops:
        for Y in ops:
            assert fro(X @ Y - Y @ X) <= 1e-9 * fro(X) * fro(Y)
    M = T.J.matrix
    for X in A:
        assert fro(X @ M - M @ X.conj()) <= 1e-10 * max(fro(X), 1) * G.dim
    for B in T.B_list:
        assert fro(B @ M - M @ B.T) <= 1e-10 * G.dim
    assert validate_hypotheses(T, tol=1e-8).passed
    # operator words applied to y_{0,0}
    for (m, n), v in G.coord_map.items():
        w = G.y0
        for j, p in enumerate(m):
            w = np.linalg.matrix_power(A[j], p) @ w
        for j, p in enumerate(n):
            Bj = T.B_list[j] if p >= 0 else dagger(T.B_list[j])
            w = np.linalg.matrix_power(Bj, abs(p)) @ w
        assert np.linalg.norm(w - v) < 1e-9 * max(1, np.linalg.norm(v))


def test_two_atom_solve():
    nu = solve(moments_from_measure(TWO, (3,), (3,)))
    hd, pos, w = match_atoms(TWO, nu)
    assert hd < 1e-8 and w < 1e-8


def test_dirac_solve():
    nu = solve(moments_from_measure(dirac(), (1,), (1,)))
    assert nu.n_atoms == 1 and np.allclose(nu.x, 0) and np.allclose(nu.phi, 0) and np.allclose(nu.weights, 1)


@given(st.integers(1, 2), st.integers(0, 2), st.integers(1, 6), seeds)
def test_round_trip(r, l, k, seed):
    if l == 0:
        k = min(k, 3)
    mu, S = random_flat_instance(np.random.default_rng(seed), r, l, k)
    nu = solve(S)
    hd, _, w = match_atoms(mu, nu)
    assert hd < 1e-7 and w < 1e-8
    assert verify_solution(nu, S).max_deviation <= 1e-8


def test_partial_power_shift_goes_through_extension():
    # two atoms share an angle: the x-shift is only defined on functions of phi
    mu = AtomicMeasure.from_atoms(1, 1, [((1.0,), (0.3,), 0.5), ((-0.5,), (0.3,), 0.7), ((0.7,), (2.0,), 0.4)])
    S = moments_from_measure(mu, (1,), (2,))
    res = solve_detailed(S)
    assert not res.instance.A1.is_total
    assert res.extension is not None
    rep = verify_solution(res.measure, S, indices=reachable_indices(S))
    assert rep.passed and rep.max_deviation < 1e-10
    assert abs(res.measure.weights.sum() - mu.weights.sum()) < 1e-12


def test_non_flat_frequency_shift():
    # three atoms at distinct angles but a frequency box seeing only two of them
    mu = AtomicMeasure.from_atoms(1, 1, [((0.0,), (0.0,), 1.0), ((0.0,), (2.0,), 1.0), ((0.0,), (-2.0,), 1.0)])
    S = moments_from_measure(mu, (1,), (1,))
    with pytest.raises(NotFlat):
        solve(S)


def test_verify_solution_examples():
    S = moments_from_measure(TWO, (1,), (1,))
    assert verify_solution(TWO, S).passed
    heavier = AtomicMeasure(1, 1, TWO.x, TWO.phi, TWO.weights + np.array([0.1, 0.0]))
    rep = verify_solution(heavier, S)
    assert rep.max_deviation >= 0.1 - 1e-14
    empty = AtomicMeasure(1, 1, np.zeros((0, 1)), np.zeros((0, 1)), np.zeros(0))
    rep = verify_solution(empty, moments_from_measure(dirac(), (1,), (1,)))
    assert rep.max_deviation == pytest.approx(1.0) and not rep.passed


def test_match_atoms_wraps_angles():
    a = AtomicMeasure.from_atoms(1, 1, [((0.0,), (np.pi - 1e-9,), 1.0)])
    b = AtomicMeasure.from_atoms(1, 1, [((0.0,), (-np.pi,), 1.0)])
    hd, _, w = match_atoms(a, b)
    assert hd < 1e-8 and w == 0
