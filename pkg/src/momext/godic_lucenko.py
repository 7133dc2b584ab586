"""Factorizing commuting unitaries into products of conjugations.

For a commuting unitary family ``U_k = V D_k V^H`` the diagonal model gives

    U_k = J_k C,   M_C = V V^T,        M_{J_k} = V D_k V^T
    U_k = K L_k,   M_K = V D_1 V^T,    M_{L_k} = V D_1 conj(D_k) V^T

so one conjugation is shared across the whole family in either order.
"""
from __future__ import annotations

import numpy as np

from .antilinear import Conjugation
from .errors import InvalidShape, NotCommuting, NotUnitary
from .numerics import (
    DEFAULT_TOL,
    Subspace,
    as_square,
    commutator,
    dagger,
    fro,
    group_joint_eigenvalues,
    joint_diagonalize,
    unitarity_defect,
)


def _check_family(family, tol):
    family = [as_square(U) for U in family]
    if not family:
        raise InvalidShape("empty unitary family")
    n = family[0].shape[0]
    for k, U in enumerate(family):
        if U.shape != (n, n):
            raise InvalidShape(f"member {k} has shape {U.shape}, expected {(n, n)}")
        d = unitarity_defect(U)
        if d > tol * max(n, 1):
            raise NotUnitary(f"member {k} has unitarity defect {d:.3e}")
    for a in range(len(family)):
        for b in range(a + 1, len(family)):
            d = fro(commutator(family[a], family[b]))
            if d > tol * max(n, 1):
                raise NotCommuting(f"members {a},{b} have commutator norm {d:.3e}")
    return family


def _diagonal_model(family, tol, seed):
    spec = joint_diagonalize(family, tol=tol, seed=seed)
    V = spec.eigenbasis
    # Unit-modulus eigenvalues; renormalize away rounding.
    D = [lam / np.abs(lam) for lam in spec.eigenvalue_lists]
    return V, D


def factor_common_right(family, tol: float = DEFAULT_TOL, seed: int = 0):
    """Conjugations ``J_1..J_n`` and one shared ``C`` with ``U_k = J_k C``."""
    family = _check_family(family, tol)
    V, D = _diagonal_model(family, tol, seed)
    C = Conjugation(V @ V.T)
    Js = [Conjugation((V * d) @ V.T) for d in D]
    return Js, C


def factor_common_left(family, tol: float = DEFAULT_TOL, seed: int = 0):
    """One shared ``K`` and conjugations ``L_1..L_n`` with ``U_k = K L_k``.

    ``K`` is the left factor of the first member's right factorization,
    ``K = J_1``, and ``L_k = J_1 J_k C``.
    """
    family = _check_family(family, tol)
    V, D = _diagonal_model(family, tol, seed)
    K = Conjugation((V * D[0]) @ V.T)
    Ls = [Conjugation((V * (D[0] * d.conj())) @ V.T) for d in D]
    return K, Ls


def factor_single(U, tol: float = DEFAULT_TOL, seed: int = 0):
    """Godic-Lucenko factorization of one unitary: ``U = J C``."""
    Js, C = factor_common_right([U], tol=tol, seed=seed)
    return Js[0], C


def cyclic_decomposition(family, tol: float = DEFAULT_TOL, seed: int = 0):
    """Orthogonal decomposition of C^n into subspaces cyclic for the family.

    Seeds are the standard basis vectors in index order. The orbit closure of
    a seed is spanned by its components in the joint eigenspaces, which are
    exactly the projections obtained from polynomials in the U_k and U_k^H.
    """
    family = _check_family(family, tol)
    n = family[0].shape[0]
    spec = joint_diagonalize(family, tol=tol, seed=seed)
    V = spec.eigenbasis
    groups = group_joint_eigenvalues(spec.joint_eigenvalues(), tol=max(1e3 * tol, 1e-8))
    eigenspaces = [V[:, g] for g in groups]

    pieces = []
    G = np.zeros((n, 0), dtype=complex)
    for i in range(n):
        if G.shape[1] == n:
            break
        u = np.zeros(n, dtype=complex)
        u[i] = 1.0
        u = u - G @ (dagger(G) @ u)
        nrm = np.linalg.norm(u)
        if nrm <= max(tol, 1e-8):
            continue
        cols = []
        for E in eigenspaces:
            w = E @ (dagger(E) @ u)
            w = w - G @ (dagger(G) @ w)
            wn = np.linalg.norm(w)
            if wn > max(tol, 1e-8) * nrm:
                cols.append(w / wn)
        if not cols:
            continue
        B = np.column_stack(cols)
        pieces.append(Subspace(n, B))
        G = np.column_stack([G, B])
    return pieces


def factorization_residuals(family, lefts, rights):
    """Frobenius residuals ``||M_left conj(M_right) - U_k||`` per member."""
    out = []
    for U, Lf, Rt in zip(family, lefts, rights):
        out.append(fro(Lf.matrix @ Rt.matrix.conj() - np.asarray(U)))
    return out
