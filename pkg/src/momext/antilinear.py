"""Conjugations (antiunitary involutions) on C^n.

Every conjugation on a finite-dimensional space has the form
``x -> M @ conj(x)`` with ``M`` symmetric and unitary, so a ``Conjugation``
simply stores ``M``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotAConjugation, NotUnitary
from .numerics import as_square, dagger, fro, polar_unitary, unitarity_defect

REPAIR_LIMIT = 1e-6


@dataclass(frozen=True)
class ConjugationReport:
    unitarity_defect: float
    symmetry_defect: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.unitarity_defect <= self.threshold and self.symmetry_defect <= self.threshold


def _defects(M: np.ndarray):
    return unitarity_defect(M), fro(M - M.T)


def _threshold(dim: int) -> float:
    return 1e-10 * max(dim, 1)


@dataclass(frozen=True, eq=False)
class Conjugation:
    """Antilinear involution ``x -> matrix @ conj(x)``.

    Matrices whose defects are small but above the validation threshold are
    re-symmetrized and replaced by their unitary polar factor; anything worse
    than ``REPAIR_LIMIT`` is rejected.
    """

    matrix: np.ndarray

    def __post_init__(self):
        M = as_square(self.matrix).copy()
        u, s = _defects(M)
        if max(u, s) > REPAIR_LIMIT * max(M.shape[0], 1):
            raise NotAConjugation(f"unitarity defect {u:.3e}, symmetry defect {s:.3e}")
        if max(u, s) > _threshold(M.shape[0]):
            M = polar_unitary((M + M.T) / 2)
            M = (M + M.T) / 2
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        return apply(self, x)

    @classmethod
    def plain(cls, dim: int) -> "Conjugation":
        """Entrywise complex conjugation."""
        return cls(np.eye(dim, dtype=complex))


def apply(J: Conjugation, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != J.dim:
        raise DimensionMismatch(f"vector of length {x.shape[0]} for a conjugation of dim {J.dim}")
    return J.matrix @ x.conj()


def compose_JC(J: Conjugation, C: Conjugation) -> np.ndarray:
    """The linear map ``x -> J(C(x))``, i.e. ``M_J @ conj(M_C)``."""
    if J.dim != C.dim:
        raise DimensionMismatch(f"conjugations of dims {J.dim} and {C.dim}")
    U = J.matrix @ C.matrix.conj()
    d = unitarity_defect(U)
    if d > _threshold(J.dim):
        raise NotUnitary(f"product of conjugations has unitarity defect {d:.3e}")
    return U


def conjugate_by_unitary(J: Conjugation, V) -> Conjugation:
    """The conjugation ``V J V^{-1}``; its matrix is ``V M_J V^T``."""
    V = as_square(V)
    if V.shape[0] != J.dim:
        raise DimensionMismatch(f"unitary of dim {V.shape[0]} for a conjugation of dim {J.dim}")
    d = unitarity_defect(V)
    if d > _threshold(J.dim):
        raise NotUnitary(f"unitarity defect {d:.3e}")
    return Conjugation(V @ J.matrix @ V.T)


def validate(J) -> ConjugationReport:
    """Unitarity and symmetry defects of a conjugation (or a raw matrix)."""
    M = J.matrix if isinstance(J, Conjugation) else as_square(J)
    u, s = _defects(M)
    return ConjugationReport(u, s, _threshold(M.shape[0]))


def random_conjugation(dim: int, rng: np.random.Generator) -> Conjugation:
    from .numerics import haar_unitary

    V = haar_unitary(dim, rng)
    return Conjugation(V @ V.T)


def antilinear_product_matrix(*conjugations: Conjugation) -> np.ndarray:
    """Matrix N of the composition of an odd number of conjugations.

    The composition is antilinear and acts as ``x -> N @ conj(x)``.
    """
    if len(conjugations) % 2 == 0:
        raise ValueError("an even number of conjugations composes to a linear map")
    N = conjugations[0].matrix
    for k, J in enumerate(conjugations[1:], start=1):
        N = N @ (J.matrix.conj() if k % 2 else J.matrix)
    return N


def inner(x, y) -> complex:
    """Inner product linear in the first slot, antilinear in the second."""
    return complex(np.vdot(y, x))


__all__ = [
    "Conjugation",
    "ConjugationReport",
    "apply",
    "compose_JC",
    "conjugate_by_unitary",
    "validate",
    "random_conjugation",
    "inner",
]
