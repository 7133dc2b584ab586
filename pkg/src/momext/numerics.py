"""Dense complex linear algebra used throughout the package.

The Hermitian eigensolver is a cyclic two-sided complex Jacobi method
(compiled with numba); everything else (ranks, kernels, joint
diagonalization, pseudo-inverses) is built on top of it.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from numba import njit

from .errors import (
    DimensionMismatch,
    InvalidShape,
    NoConvergence,
    NotCommuting,
    NotHermitian,
    NotNormal,
    NotPSD,
)

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 30
OFF_DIAGONAL_TARGET = 1e-14
STALL_LEVEL = 1e-12
CLUSTER_GAP = 1e-8
PHASE_CUTOFF = 1e-8


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise InvalidShape(f"expected a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidShape("matrix has non-finite entries")
    return A


def as_square(A) -> np.ndarray:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise InvalidShape(f"expected a square matrix, got shape {A.shape}")
    return A


def fro(A) -> float:
    return float(np.linalg.norm(A))


def dagger(A) -> np.ndarray:
    return A.conj().T


def commutator(A, B) -> np.ndarray:
    return A @ B - B @ A


def unitarity_defect(U) -> float:
    U = np.asarray(U)
    return fro(dagger(U) @ U - np.eye(U.shape[1]))


def normality_defect(T) -> float:
    return fro(T @ dagger(T) - dagger(T) @ T)


# ---------------------------------------------------------------------------
# Hermitian eigensolver


@njit(cache=True)
def _sweep(a, Vt):
    # One cyclic sweep of complex Jacobi rotations over all pairs p < q.
    # Only rows p, q are computed; columns follow from Hermitian symmetry.
    # Vt holds the transposed eigenvector matrix so updates are row-contiguous.
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            b = a[p, q]
            absb = abs(b)
            if absb == 0.0:
                continue
            app = a[p, p].real
            aqq = a[q, q].real
            theta = (aqq - app) / (2.0 * absb)
            if abs(theta) > 1e150:
                t = 0.5 / theta
            else:
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            ph = b / absb
            cph = ph.conjugate()
            for k in range(n):
                xp = a[p, k]
                xq = a[q, k]
                yp = c * xp - (s * ph) * xq
                yq = s * xp + (c * ph) * xq
                a[p, k] = yp
                a[q, k] = yq
                a[k, p] = yp.conjugate()
                a[k, q] = yq.conjugate()
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = app - t * absb
            a[q, q] = aqq + t * absb
            for k in range(n):
                xp = Vt[p, k]
                xq = Vt[q, k]
                Vt[p, k] = xp * c - xq * (s * cph)
                Vt[q, k] = xp * s + xq * (c * cph)


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0)
    return fro(off)


def fix_phases(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real positive."""
    V = np.array(V, dtype=complex)
    for j in range(V.shape[1]):
        col = V[:, j]
        big = np.flatnonzero(np.abs(col) > PHASE_CUTOFF * max(np.linalg.norm(col), 1e-300))
        if big.size:
            z = col[big[0]]
            V[:, j] = col * (abs(z) / z)
    return V


def hermitian_eig(A, tol: float = DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix by two-sided Jacobi rotations.

    Returns ``(eigenvalues, V)`` with eigenvalues ascending and the columns of
    the unitary ``V`` phase-normalized. Raises ``NotHermitian`` when
    ``||A - A^H||_F > tol * ||A||_F`` and ``NoConvergence`` after
    ``MAX_SWEEPS`` sweeps.
    """
    A = as_square(A)
    n = A.shape[0]
    norm = fro(A)
    if n == 0 or norm == 0:
        return np.zeros(n), np.eye(n, dtype=complex)
    if fro(A - dagger(A)) > tol * norm:
        raise NotHermitian(f"Hermitian defect {fro(A - dagger(A)):.3e} exceeds {tol:.1e}*||A||")
    a = (A + dagger(A)) / 2
    Vt = np.eye(n, dtype=complex)
    # Rounding leaves an off-diagonal floor of roughly eps * n * ||A||.
    target = OFF_DIAGONAL_TARGET * max(1.0, n / 10) * norm
    prev = np.inf
    for sweep in range(MAX_SWEEPS + 1):
        off = _off_norm(a)
        if off <= target or (off > 0.5 * prev and off <= STALL_LEVEL * norm):
            break
        prev = off
        if sweep == MAX_SWEEPS:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off={off:.3e})")
        _sweep(a, Vt)
    lam = a.diagonal().real.copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], fix_phases(Vt.T[:, order])


# ---------------------------------------------------------------------------
# Subspaces


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^n given by an orthonormal column basis."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ dagger(self.basis)

    def orthonormality_defect(self) -> float:
        return fro(dagger(self.basis) @ self.basis - np.eye(self.dim))

    def complement(self) -> "Subspace":
        return orthogonal_complement(self)

    def residual(self, X) -> float:
        """Frobenius norm of the part of the columns of X outside the subspace."""
        X = np.asarray(X, dtype=complex)
        return fro(X - self.basis @ (dagger(self.basis) @ X))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, np.eye(n, dtype=complex))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((n, 0), dtype=complex))


def orthonormalize(vectors, tol: float = DEFAULT_TOL) -> Subspace:
    """Gram-Schmidt (with one re-orthogonalization pass) over the columns.

    A column is dropped when its residual after projection is at most
    ``tol`` times its original norm.
    """
    X = as_matrix(vectors)
    n = X.shape[0]
    cols = []
    B = np.zeros((n, 0), dtype=complex)
    for j in range(X.shape[1]):
        v = X[:, j]
        nrm0 = np.linalg.norm(v)
        if nrm0 == 0:
            continue
        w = v.copy()
        for _ in range(2):
            if cols:
                w = w - B @ (dagger(B) @ w)
        nrm = np.linalg.norm(w)
        if nrm <= tol * nrm0:
            continue
        cols.append(w / nrm)
        B = np.column_stack(cols)
    return Subspace(n, B)


def orthogonal_complement(sub: Subspace) -> Subspace:
    n = sub.ambient_dim
    if sub.dim == 0:
        return Subspace.full(n)
    if sub.dim == n:
        return Subspace.zero(n)
    lam, V = hermitian_eig(np.eye(n) - sub.projector())
    return Subspace(n, V[:, lam > 0.5])


def rank_and_kernel(G, tol: float = DEFAULT_TOL):
    """Rank, kernel and range of a Hermitian PSD matrix.

    Eigenvalues above ``tol * max(lambda)`` count toward the rank; an
    eigenvalue below ``-tol * max|lambda|`` raises ``NotPSD``.
    """
    G = as_square(G)
    n = G.shape[0]
    lam, V = hermitian_eig(G, tol=max(tol, 1e-12))
    scale = np.max(np.abs(lam)) if n else 0.0
    if n and lam[0] < -tol * scale:
        raise NotPSD(
            f"minimum eigenvalue {lam[0]:.3e} below -tol*max|lambda|",
            certificate=V[:, 0],
            min_eigenvalue=lam[0],
        )
    big = lam > tol * scale if scale > 0 else np.zeros(n, dtype=bool)
    return int(big.sum()), Subspace(n, V[:, ~big]), Subspace(n, V[:, big])


def pinv_with_range(X, tol: float = DEFAULT_TOL):
    """Pseudo-inverse of X and an orthonormal basis of its column space.

    Singular values come from the Jacobi eigen-decomposition of the smaller
    of X X^H and X^H X; squared singular values at or below ``tol * max``
    are discarded.
    """
    X = as_matrix(X)
    m, k = X.shape
    if X.size == 0:
        return np.zeros((k, m), dtype=complex), Subspace.zero(m)
    if m <= k:
        lam, U = hermitian_eig(X @ dagger(X), tol=1e-8)
        top = lam.max()
        keep = lam > tol * top if top > 0 else np.zeros(m, dtype=bool)
        U = U[:, keep]
        return dagger(X) @ (U / lam[keep]) @ dagger(U), Subspace(m, U)
    lam, W = hermitian_eig(dagger(X) @ X, tol=1e-8)
    top = lam.max()
    keep = lam > tol * top if top > 0 else np.zeros(k, dtype=bool)
    W, lam = W[:, keep], lam[keep]
    U = (X @ W) / np.sqrt(lam)
    return (W / lam) @ dagger(W) @ dagger(X), Subspace(m, U)


def psd_power(P, power: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    lam, V = hermitian_eig(P, tol=1e-8)
    if lam.size and lam[0] <= 0:
        raise NotPSD("matrix is not positive definite", min_eigenvalue=lam[0])
    return (V * lam**power) @ dagger(V)


def polar_unitary(M) -> np.ndarray:
    """Unitary factor U of the polar decomposition M = U P (M invertible)."""
    M = as_square(M)
    return M @ psd_power(dagger(M) @ M, -0.5)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return orthonormalize(Z, tol=1e-12).basis


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    return orthonormalize(rng.standard_normal((dim, dim)), tol=1e-12).basis.real.copy()


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (Z + dagger(Z)) / 2


# ---------------------------------------------------------------------------
# Joint diagonalization


@dataclass(frozen=True, eq=False)
class JointSpectrum:
    eigenbasis: np.ndarray
    eigenvalue_lists: list

    @property
    def dim(self) -> int:
        return self.eigenbasis.shape[0]

    def reconstruct(self, k: int) -> np.ndarray:
        V = self.eigenbasis
        return (V * self.eigenvalue_lists[k]) @ dagger(V)

    def joint_eigenvalues(self) -> np.ndarray:
        """Array of shape (dim, family size): one row per eigenvector."""
        return np.column_stack(self.eigenvalue_lists) if self.eigenvalue_lists else np.zeros((self.dim, 0))


def _hermitian_parts(T):
    return (T + dagger(T)) / 2, (T - dagger(T)) / 2j


def _split(family, rng, tol, depth):
    n = family[0].shape[0]
    H = np.zeros((n, n), dtype=complex)
    for T in family:
        scale = fro(T) or 1.0
        re, im = _hermitian_parts(T)
        H += (rng.standard_normal() * re + rng.standard_normal() * im) / scale
    H = (H + dagger(H)) / 2
    lam, V = hermitian_eig(H, tol=1e-8)
    spread = lam[-1] - lam[0]
    if n == 1 or spread == 0:
        return V
    cuts = np.flatnonzero(np.diff(lam) > CLUSTER_GAP * spread) + 1
    for idx in np.split(np.arange(n), cuts):
        if idx.size < 2:
            continue
        Q = V[:, idx]
        sub = [dagger(Q) @ T @ Q for T in family]
        scalar = all(
            fro(S - np.trace(S) / idx.size * np.eye(idx.size)) <= tol * max(fro(T), 1e-300)
            for S, T in zip(sub, family)
        )
        if scalar or depth >= 8:
            continue
        V[:, idx] = Q @ _split(sub, rng, tol, depth + 1)
    return V


def _sort_joint(V, values):
    keys = []
    for lam in values:
        scale = np.max(np.abs(lam)) or 1.0
        keys.append(np.round(lam.real / scale, 9))
        keys.append(np.round(lam.imag / scale, 9))
    order = np.lexsort(keys[::-1]) if keys else np.arange(V.shape[1])
    return order


def joint_diagonalize(family, tol: float = DEFAULT_TOL, seed: int = 0) -> JointSpectrum:
    """One unitary that diagonalizes every member of a commuting normal family.

    A random real combination of the Hermitian and skew-Hermitian parts is
    diagonalized; near-degenerate clusters are split recursively with fresh
    draws. If the result fails the residual check a second draw is made
    before giving up with ``NoConvergence``.
    """
    family = [as_square(T) for T in family]
    if not family:
        raise InvalidShape("joint_diagonalize needs at least one matrix")
    n = family[0].shape[0]
    for T in family:
        if T.shape != (n, n):
            raise DimensionMismatch("family members have different shapes")
    norms = [fro(T) for T in family]
    for k, T in enumerate(family):
        d = normality_defect(T)
        if d > tol * max(norms[k] ** 2, 1e-300):
            raise NotNormal(f"member {k} has normality defect {d:.3e}")
    for a in range(len(family)):
        for b in range(a + 1, len(family)):
            d = fro(commutator(family[a], family[b]))
            if d > tol * max(norms[a] * norms[b], 1e-300):
                raise NotCommuting(f"members {a},{b} have commutator norm {d:.3e}")
    if n == 0:
        return JointSpectrum(np.eye(0, dtype=complex), [np.zeros(0, dtype=complex) for _ in family])

    rng = np.random.default_rng(seed)
    worst = np.inf
    for _attempt in range(2):
        V = _split(family, rng, tol, 0)
        values, worst = [], 0.0
        for T, nrm in zip(family, norms):
            D = dagger(V) @ T @ V
            lam = D.diagonal().copy()
            off = fro(D - np.diag(lam))
            worst = max(worst, off / nrm if nrm else off)
            values.append(lam)
        if worst <= tol:
            order = _sort_joint(V, values)
            V = fix_phases(V[:, order])
            values = [np.asarray((dagger(V) @ T @ V).diagonal()) for T in family]
            return JointSpectrum(V, values)
    raise NoConvergence(f"joint diagonalization residual {worst:.3e} exceeds {tol:.1e}")


def group_joint_eigenvalues(values: np.ndarray, tol: float):
    """Indices grouped by (approximately) equal rows of a joint-eigenvalue table."""
    values = np.asarray(values)
    n = values.shape[0]
    scale = max(float(np.max(np.abs(values))) if values.size else 0.0, 1.0)
    groups, taken = [], np.zeros(n, dtype=bool)
    for a in range(n):
        if taken[a]:
            continue
        close = ~taken & (np.max(np.abs(values - values[a]), axis=1, initial=0.0) <= tol * scale)
        members = np.flatnonzero(close)
        taken[members] = True
        groups.append(members)
    return groups
