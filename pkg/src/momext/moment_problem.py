"""Truncated power-trigonometric moment problem on R^r x [-pi, pi)^l.

Moments ``s[m, n] = integral of x^m exp(i n.phi) dmu`` are ingested on a
box, the sesquilinear form ``B(p, q)`` becomes a Gram matrix over box
monomials, and the GNS quotient of that form carries the shift operators
(multiplication by ``x_j`` and by ``exp(i phi_k)``) together with the
conjugation ``y[m, n] -> y[m, -n]``. A commuting self-adjoint/unitary
closure of those operators is jointly diagonalized; its joint eigenvalues
and the spectral weights of ``y[0, 0]`` form an atomic representing
measure.

Operator indices ``j`` (power coordinates) and ``k`` (angle coordinates)
are 1-based throughout this module.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .antilinear import Conjugation
from .cayley_extension import (
    CommutingTupleInstance,
    ExtensionResult,
    PartialSymmetricOperator,
    build_extension,
)
from .errors import ConditionBFailed, IncompleteTable, InputError, NoConvergence, NotFlat, NotPSD
from .numerics import (
    DEFAULT_TOL,
    JointSpectrum,
    Subspace,
    dagger,
    fro,
    group_joint_eigenvalues,
    hermitian_eig,
    joint_diagonalize,
    pinv_with_range,
    polar_unitary,
    unitarity_defect,
)

OPERATOR_TOL = 1e-8


def wrap_angle(phi):
    """Map angles into [-pi, pi)."""
    return np.mod(np.asarray(phi, dtype=float) + np.pi, 2 * np.pi) - np.pi


# ---------------------------------------------------------------------------
# Data types


def box_indices(m_box, n_box):
    """Box monomials ``(m, n)`` with ``m <= m_box`` and ``|n| <= n_box``.

    Lexicographic in ``(m, n + n_box)``.
    """
    m_ranges = [range(b + 1) for b in m_box]
    n_ranges = [range(-b, b + 1) for b in n_box]
    out = []
    for m in itertools.product(*m_ranges):
        for n in itertools.product(*n_ranges):
            out.append((tuple(m), tuple(n)))
    return out


def _required_indices(m_box, n_box):
    return box_indices([2 * b + 2 for b in m_box], [2 * b for b in n_box])


@dataclass(frozen=True, eq=False)
class MomentTable:
    r: int
    l: int
    m_box: tuple
    n_box: tuple
    entries: dict

    def __post_init__(self):
        object.__setattr__(self, "m_box", tuple(int(b) for b in self.m_box))
        object.__setattr__(self, "n_box", tuple(int(b) for b in self.n_box))
        if self.r < 1 or len(self.m_box) != self.r or len(self.n_box) != self.l:
            raise InputError(f"box shapes {self.m_box}, {self.n_box} do not match r={self.r}, l={self.l}")
        if any(b < 0 for b in self.m_box + self.n_box):
            raise InputError("box bounds must be nonnegative")
        entries = {(tuple(m), tuple(n)): complex(v) for (m, n), v in self.entries.items()}
        for (m, n), v in entries.items():
            if not np.isfinite(v):
                raise InputError(f"non-finite moment at {(m, n)}")
            mirror = entries.get((m, tuple(-x for x in n)))
            if mirror is not None and abs(v.conjugate() - mirror) > 1e-12 * max(1.0, abs(v)):
                raise InputError(f"moments at n={n} and -n are not complex conjugates (m={m})")
        object.__setattr__(self, "entries", entries)

    def get(self, m, n) -> complex:
        try:
            return self.entries[(tuple(m), tuple(n))]
        except KeyError:
            raise IncompleteTable(f"moment s[{tuple(m)}, {tuple(n)}] is missing") from None

    def required_indices(self):
        return _required_indices(self.m_box, self.n_box)

    def missing(self):
        return [ix for ix in self.required_indices() if ix not in self.entries]

    @property
    def mass(self) -> complex:
        return self.get((0,) * self.r, (0,) * self.l)


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    r: int
    l: int
    x: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        x = np.asarray(self.x, dtype=float).reshape(w.size, self.r)
        phi = np.asarray(self.phi, dtype=float).reshape(w.size, self.l)
        if np.any(w <= 0):
            raise InputError("atom weights must be positive")
        if phi.size and (np.any(phi < -np.pi) or np.any(phi >= np.pi)):
            raise InputError("angles must lie in [-pi, pi)")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "phi", phi)

    @property
    def n_atoms(self) -> int:
        return self.weights.size

    @classmethod
    def from_atoms(cls, r, l, atoms):
        """Build from ``[(x, phi, weight), ...]``; angles are wrapped."""
        atoms = list(atoms)
        x = np.array([a[0] for a in atoms], dtype=float).reshape(len(atoms), r)
        phi = wrap_angle(np.array([a[1] for a in atoms], dtype=float).reshape(len(atoms), l))
        w = np.array([a[2] for a in atoms], dtype=float)
        return cls(r, l, x, phi, w)


@dataclass(frozen=True, eq=False)
class GnsSpace:
    """Finite GNS space: column ``a`` of ``coords`` is the coordinate vector
    of ``y[indices[a]]`` in an orthonormal basis, so that
    ``coords[:, b]^H coords[:, a] = s[m_a + m_b, n_a - n_b]``."""

    r: int
    l: int
    m_box: tuple
    n_box: tuple
    indices: list
    coords: np.ndarray
    eigenvalues: np.ndarray
    gram_tol: float
    index_of: dict = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "index_of", {ix: a for a, ix in enumerate(self.indices)})

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def coord(self, m, n) -> np.ndarray:
        return self.coords[:, self.index_of[(tuple(m), tuple(n))]]

    @property
    def coord_map(self) -> dict:
        return {ix: self.coords[:, a] for a, ix in enumerate(self.indices)}

    def vector(self, coeffs) -> np.ndarray:
        """Coordinates of ``sum_a coeffs[a] y[indices[a]]``."""
        return self.coords @ np.asarray(coeffs, dtype=complex)

    @property
    def y0(self) -> np.ndarray:
        return self.coord((0,) * self.r, (0,) * self.l)

    def shift_indices(self, kind: str, j: int):
        """Source/target column indices of the shift ``y[a] -> y[a + e_j]``.

        ``kind`` is ``"x"`` (power shift) or ``"phi"`` (frequency shift); the
        sources are the monomials whose shift stays in the box.
        """
        src, dst = [], []
        for a, (m, n) in enumerate(self.indices):
            if kind == "x":
                if m[j - 1] >= self.m_box[j - 1]:
                    continue
                target = (m[: j - 1] + (m[j - 1] + 1,) + m[j:], n)
            elif kind == "phi":
                if n[j - 1] >= self.n_box[j - 1]:
                    continue
                target = (m, n[: j - 1] + (n[j - 1] + 1,) + n[j:])
            else:
                raise ValueError(f"unknown shift kind {kind!r}")
            src.append(a)
            dst.append(self.index_of[target])
        return np.array(src, dtype=int), np.array(dst, dtype=int)

    def shift_image(self, coeffs, kind: str, j: int) -> np.ndarray:
        """Coordinates of ``sum_a coeffs[a] y[a + e_j]`` for coefficients on the
        shift sources (a vector of length ``len(src)``)."""
        _, dst = self.shift_indices(kind, j)
        return self.coords[:, dst] @ np.asarray(coeffs, dtype=complex)

    def reflection(self) -> np.ndarray:
        """Column permutation ``y[m, n] -> y[m, -n]``."""
        return np.array([self.index_of[(m, tuple(-v for v in n))] for m, n in self.indices], dtype=int)


# ---------------------------------------------------------------------------
# Moments


def moments_from_measure(mu: AtomicMeasure, m_box, n_box) -> MomentTable:
    m_box, n_box = tuple(m_box), tuple(n_box)
    entries = {}
    for m, n in _required_indices(m_box, n_box):
        if mu.n_atoms == 0:
            entries[(m, n)] = 0j
            continue
        xm = np.prod(mu.x ** np.array(m, dtype=float), axis=1) if mu.r else np.ones(mu.n_atoms)
        ph = np.exp(1j * (mu.phi @ np.array(n, dtype=float))) if mu.l else np.ones(mu.n_atoms)
        entries[(m, n)] = complex(np.sum(mu.weights * xm * ph))
    return MomentTable(mu.r, mu.l, m_box, n_box, entries)


def gram_matrix(S: MomentTable, shift=None) -> np.ndarray:
    """Gram matrix ``G[a, b] = s[m_a + m_b + shift, n_a - n_b]`` over box monomials."""
    shift = tuple(shift) if shift is not None else (0,) * S.r
    idx = box_indices(S.m_box, S.n_box)
    N = len(idx)
    G = np.empty((N, N), dtype=complex)
    for a, (m, n) in enumerate(idx):
        for b, (k, q) in enumerate(idx):
            G[a, b] = S.get(
                tuple(u + v + w for u, v, w in zip(m, k, shift)),
                tuple(u - v for u, v in zip(n, q)),
            )
    return G


@dataclass(frozen=True)
class PositivityReport:
    passed: bool
    min_eigenvalue: float
    max_eigenvalue: float
    certificate: np.ndarray | None
    indices: list

    def certificate_terms(self, cutoff: float = 1e-8):
        """Nonzero coefficients of the violation certificate keyed by monomial."""
        if self.certificate is None:
            return {}
        return {ix: c for ix, c in zip(self.indices, self.certificate) if abs(c) > cutoff}


def check_positivity(S: MomentTable, tol: float = DEFAULT_TOL) -> PositivityReport:
    """Positive semi-definiteness of the moment form on box polynomials.

    On failure the certificate ``alpha`` satisfies
    ``sum alpha[a] conj(alpha[b]) G[a, b] = min_eigenvalue < 0``.
    """
    G = gram_matrix(S)
    lam, V = hermitian_eig(G, tol=1e-8)
    top = float(lam[-1])
    low = float(lam[0])
    scale = max(abs(top), abs(low))
    passed = low >= -tol * scale
    idx = box_indices(S.m_box, S.n_box)
    cert = None if passed else _certificate(lam, V, idx.index(((0,) * S.r, (0,) * S.l)), tol * scale)
    return PositivityReport(passed, low, top, cert, idx)


def _certificate(lam, V, origin, gap):
    # The minimal eigenspace may be degenerate; prefer the direction closest
    # to the constant polynomial so the certificate does not depend on the
    # eigensolver's choice of basis.
    E = V[:, lam <= lam[0] + gap]
    v = E @ E[origin].conj()
    nv = np.linalg.norm(v)
    v = v / nv if nv > 1e-8 else V[:, 0]
    return v.conj()


@dataclass(frozen=True)
class ConditionBReport:
    passed: bool
    j0: int
    constants: dict


def check_condition_B(S: MomentTable, j0: int = 1, tol: float = DEFAULT_TOL) -> ConditionBReport:
    """Smallest ``C_j`` with ``G_j <= C_j G`` on the Gram range, for ``j != j0``.

    ``G_j`` is the Gram matrix of the table shifted by ``2 e_j``. A constant
    is infinite when ``G_j`` does not vanish on the kernel of ``G``.
    """
    if not 1 <= j0 <= S.r:
        raise InputError(f"j0={j0} out of range 1..{S.r}")
    constants = {}
    if S.r == 1:
        return ConditionBReport(True, j0, constants)
    G = gram_matrix(S)
    lam, V = hermitian_eig(G, tol=1e-8)
    top = lam[-1]
    keep = lam > tol * top if top > 0 else np.zeros(lam.size, dtype=bool)
    R, lr = V[:, keep], lam[keep]
    Kb = V[:, ~keep]
    for j in range(1, S.r + 1):
        if j == j0:
            continue
        e = tuple(2 if i == j - 1 else 0 for i in range(S.r))
        Gj = gram_matrix(S, shift=e)
        nj = max(fro(Gj), 1e-300)
        if Kb.shape[1] and fro(Gj @ Kb) > 1e-6 * nj:
            constants[j] = float("inf")
            continue
        if R.shape[1] == 0:
            constants[j] = 0.0
            continue
        Mj = (dagger(R) @ Gj @ R) / np.sqrt(np.outer(lr, lr))
        constants[j] = float(hermitian_eig((Mj + dagger(Mj)) / 2, tol=1e-6)[0][-1])
    passed = all(np.isfinite(c) for c in constants.values())
    return ConditionBReport(passed, j0, constants)


# ---------------------------------------------------------------------------
# GNS construction and operators


def gns_construct(S: MomentTable, tol: float = DEFAULT_TOL) -> GnsSpace:
    """Quotient of box polynomials by the null vectors of the moment form."""
    G = gram_matrix(S)
    lam, Q = hermitian_eig(G, tol=1e-8)
    top = lam[-1] if lam.size else 0.0
    scale = max(abs(top), abs(lam[0])) if lam.size else 0.0
    if lam.size and lam[0] < -tol * scale:
        raise NotPSD(
            f"moment form is not positive: min eigenvalue {lam[0]:.3e}",
            certificate=Q[:, 0].conj(),
            min_eigenvalue=float(lam[0]),
        )
    keep = lam > tol * top if top > 0 else np.zeros(lam.size, dtype=bool)
    lam_k = lam[keep][::-1]
    Qk = Q[:, keep][:, ::-1]
    Y = np.sqrt(lam_k)[:, None] * Qk.T
    G = GnsSpace(S.r, S.l, S.m_box, S.n_box, box_indices(S.m_box, S.n_box), Y, lam_k, tol)
    if G.dim == 0:
        return G
    # Rotate to coordinates in which y[m, -n] = conj(y[m, n]).
    W = _takagi(_reflection_matrix(G))
    return GnsSpace(S.r, S.l, S.m_box, S.n_box, G.indices, dagger(W) @ Y, lam_k, tol)


def _reflection_matrix(G: GnsSpace) -> np.ndarray:
    # M with M conj(Y alpha) = Y[:, sigma] conj(alpha), i.e. M = Y_sigma pinv(conj Y)
    Y = G.coords
    return Y[:, G.reflection()] @ pinv_with_range(Y.conj(), tol=G.gram_tol)[0]


def _takagi(M) -> np.ndarray:
    """Unitary W with ``W W^T = M`` for a symmetric unitary ``M``.

    Re M and Im M are commuting real symmetric matrices, so they share a
    real orthogonal eigenbasis O and ``M = O D O^T``; take ``W = O D^{1/2}``.
    """
    M = Conjugation(M).matrix
    k = M.shape[0]
    parts = [(P + P.T) / 2 for P in (M.real, M.imag)]
    parts = [P.astype(complex) for P in parts if fro(P) > 1e-12 * k]
    O = joint_diagonalize(parts, tol=1e-8).eigenbasis.real if parts else np.eye(k)
    d = np.diag(O.T @ M @ O)
    W = O * np.sqrt(d / np.abs(d))
    if unitarity_defect(W) > 1e-8 * k or fro(W @ W.T - M) > 1e-8 * k:
        raise NoConvergence("could not find real coordinates for the reflection")
    return W


def shift_operator(G: GnsSpace, kind: str, j: int) -> PartialSymmetricOperator:
    """Shift ``y[a] -> y[a + e_j]`` on the span of its sources.

    The domain is the column space of the source coordinates and the action is
    ``coords[:, dst] @ pinv(coords[:, src])`` applied to the domain basis.
    """
    src, dst = G.shift_indices(kind, j)
    k = G.dim
    if src.size == 0 or k == 0:
        return PartialSymmetricOperator(k, Subspace.zero(k), np.zeros((k, 0), dtype=complex))
    Ys = G.coords[:, src]
    pinv, rng = pinv_with_range(Ys, tol=G.gram_tol)
    action = G.coords[:, dst] @ (pinv @ rng.basis)
    return PartialSymmetricOperator(k, rng, action)


def gns_conjugation(G: GnsSpace) -> Conjugation:
    """Conjugation extending ``sum alpha y[m, n] -> sum conj(alpha) y[m, -n]``."""
    return Conjugation(_reflection_matrix(G))


def assemble_operators(G: GnsSpace, S: MomentTable | None = None, j0: int = 1,
                       op_tol: float = OPERATOR_TOL) -> CommutingTupleInstance:
    """Shift operators and conjugation of the GNS space as a commuting tuple.

    ``A_{j0}`` becomes the (possibly partial) symmetric operator to extend.
    Every other power shift must be total (it is then Hermitian) and every
    frequency shift must close to a unitary; otherwise ``NotFlat``.
    """
    if not 1 <= j0 <= G.r:
        raise InputError(f"j0={j0} out of range 1..{G.r}")
    k = G.dim
    A1 = None
    A_rest, B_list = [], []
    for j in range(1, G.r + 1):
        op = shift_operator(G, "x", j)
        if j == j0:
            A1 = op
            continue
        if not op.is_total:
            raise NotFlat(f"x-shift {j} is defined on a {op.domain.dim}-dim subspace of the {k}-dim GNS space")
        T = op.matrix()
        if fro(T - dagger(T)) > op_tol * max(fro(T), 1.0):
            raise NotFlat(f"x-shift {j} is not Hermitian (defect {fro(T - dagger(T)):.3e})")
        A_rest.append((T + dagger(T)) / 2)
    for j in range(1, G.l + 1):
        op = shift_operator(G, "phi", j)
        if not op.is_total:
            raise NotFlat(
                f"phi-shift {j} is defined on a {op.domain.dim}-dim subspace of the {k}-dim GNS space; "
                "it does not close to a unitary"
            )
        U = op.matrix()
        d = unitarity_defect(U) if k else 0.0
        if d > op_tol * max(k, 1):
            raise NotFlat(f"phi-shift {j} is not unitary (defect {d:.3e})")
        B_list.append(polar_unitary(U) if k else U)
    return CommutingTupleInstance(k, A1, A_rest, B_list, gns_conjugation(G), 1j)


# ---------------------------------------------------------------------------
# Solving


@dataclass(frozen=True, eq=False)
class SolveResult:
    measure: AtomicMeasure
    gns: GnsSpace
    instance: CommutingTupleInstance
    extension: ExtensionResult | None
    spectrum: JointSpectrum
    operators: list


def solve_detailed(S: MomentTable, j0: int = 1, tol: float = DEFAULT_TOL,
                   op_tol: float = OPERATOR_TOL, seed: int = 0) -> SolveResult:
    pos = check_positivity(S, tol)
    if not pos.passed:
        raise NotPSD(
            f"moment form is not positive: min eigenvalue {pos.min_eigenvalue:.3e}",
            certificate=pos.certificate,
            min_eigenvalue=pos.min_eigenvalue,
        )
    if S.r >= 2:
        cb = check_condition_B(S, j0, tol)
        if not cb.passed:
            bad = [j for j, c in cb.constants.items() if not np.isfinite(c)]
            raise ConditionBFailed(f"condition (B) fails for j in {bad}", constants=cb.constants)
    gns = gns_construct(S, tol)
    r, l = S.r, S.l
    if gns.dim == 0:
        empty = AtomicMeasure(r, l, np.zeros((0, r)), np.zeros((0, l)), np.zeros(0))
        return SolveResult(empty, gns, None, None, None, [])
    inst = assemble_operators(gns, S, j0, op_tol)
    ext = None
    if inst.A1.is_total:
        A_j0 = inst.A1.matrix()
        A_j0 = (A_j0 + dagger(A_j0)) / 2
    else:
        ext = build_extension(inst, tol=op_tol, seed=seed)
        A_j0 = ext.A1_hat
    A_all = list(inst.A_rest)
    A_all.insert(j0 - 1, A_j0)
    family = A_all + list(inst.B_list)
    spec = joint_diagonalize(family, tol=op_tol, seed=seed)

    values = spec.joint_eigenvalues()
    amplitudes = np.abs(dagger(spec.eigenbasis) @ gns.y0) ** 2
    mass = float(S.mass.real)
    atoms = []
    for grp in group_joint_eigenvalues(values, tol=1e-7):
        w = float(amplitudes[grp].sum())
        if w <= tol * max(mass, 1e-300):
            continue
        row = values[grp].mean(axis=0)
        x = row[:r].real
        phi = wrap_angle(np.angle(row[r:])) if l else np.zeros(0)
        atoms.append((x, phi, w))
    mu = AtomicMeasure.from_atoms(r, l, atoms)
    return SolveResult(mu, gns, inst, ext, spec, family)


def solve(S: MomentTable, j0: int = 1, tol: float = DEFAULT_TOL,
          op_tol: float = OPERATOR_TOL, seed: int = 0) -> AtomicMeasure:
    """Atomic representing measure for a moment table.

    Raises ``NotPSD``, ``ConditionBFailed``, ``NotFlat`` or the extension
    errors (``HypothesisViolation``, ``EigenvalueOne``).
    """
    return solve_detailed(S, j0, tol, op_tol, seed).measure


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    max_deviation: float
    worst_index: tuple | None
    checked: int


def reachable_indices(S: MomentTable):
    """Indices ``m <= 2 m_box``, ``|n| <= 2 n_box``: the entries of the Gram matrix."""
    return box_indices([2 * b for b in S.m_box], [2 * b for b in S.n_box])


def verify_solution(mu: AtomicMeasure, S: MomentTable, tol: float = 1e-8, indices=None) -> VerifyReport:
    """Max abs deviation between moments of ``mu`` and the table entries."""
    indices = list(S.entries) if indices is None else list(indices)
    if not indices:
        return VerifyReport(True, 0.0, None, 0)
    m_box = [max(m[i] for m, _ in indices) for i in range(S.r)]
    n_box = [max(abs(n[i]) for _, n in indices) for i in range(S.l)]
    worst, where = 0.0, None
    for m, n in indices:
        xm = np.prod(mu.x ** np.array(m, dtype=float), axis=1) if mu.n_atoms else np.zeros(0)
        ph = np.exp(1j * (mu.phi @ np.array(n, dtype=float))) if mu.n_atoms else np.zeros(0)
        dev = abs(complex(np.sum(mu.weights * xm * ph)) - S.get(m, n))
        if dev > worst or where is None:
            worst, where = dev, (m, n)
    del m_box, n_box
    return VerifyReport(worst <= tol, float(worst), where, len(indices))


# ---------------------------------------------------------------------------
# Comparison and random instances


def _atom_distance_matrix(mu: AtomicMeasure, nu: AtomicMeasure) -> np.ndarray:
    dx = mu.x[:, None, :] - nu.x[None, :, :]
    dphi = wrap_angle(mu.phi[:, None, :] - nu.phi[None, :, :])
    return np.sqrt(np.sum(dx**2, axis=2) + np.sum(dphi**2, axis=2))


def hausdorff_distance(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    """Hausdorff distance between supports, angles compared modulo 2 pi."""
    if mu.n_atoms == 0 or nu.n_atoms == 0:
        return 0.0 if mu.n_atoms == nu.n_atoms else float("inf")
    D = _atom_distance_matrix(mu, nu)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def match_atoms(mu: AtomicMeasure, nu: AtomicMeasure):
    """Optimal assignment of atoms; returns (hausdorff, max position error,
    max weight error). Weight error is infinite when atom counts differ."""
    from scipy.optimize import linear_sum_assignment

    hd = hausdorff_distance(mu, nu)
    if mu.n_atoms != nu.n_atoms:
        return hd, float("inf"), float("inf")
    if mu.n_atoms == 0:
        return 0.0, 0.0, 0.0
    D = _atom_distance_matrix(mu, nu)
    rows, cols = linear_sum_assignment(D)
    return hd, float(D[rows, cols].max()), float(np.max(np.abs(mu.weights[rows] - nu.weights[cols])))


def flat_boxes(r: int, l: int, n_atoms: int):
    """Boxes for which generic measures with ``n_atoms`` atoms are flat.

    With angle coordinates: power degree 1 and an inner frequency grid of at
    least ``n_atoms + 1`` points. Without them: the smallest power degree
    whose inner box has ``n_atoms`` monomials.
    """
    if l == 0:
        mb = 1
        while mb**r < n_atoms:
            mb += 1
        return (mb,) * r, ()
    nb = 1
    while (2 * nb - 1) ** l < n_atoms + 1:
        nb += 1
    return (1,) * r, (nb,) * l


def is_flat(S: MomentTable, tol: float = DEFAULT_TOL, min_ratio: float = 0.0) -> bool:
    """Inner-box rank equals full-box rank (and, optionally, both Gram
    matrices have nonzero spectra above ``min_ratio * max``)."""
    G = gram_matrix(S)
    idx = box_indices(S.m_box, S.n_box)
    inner = [a for a, (m, n) in enumerate(idx)
             if all(u < b for u, b in zip(m, S.m_box)) and all(abs(v) < b for v, b in zip(n, S.n_box))]
    out = []
    for sub in (G, G[np.ix_(inner, inner)]):
        lam = hermitian_eig(sub, tol=1e-8)[0]
        top = lam[-1]
        nz = lam[lam > tol * top]
        out.append((nz.size, nz.min() / top if nz.size else 0.0))
    (rank_full, ratio_full), (rank_inner, ratio_inner) = out
    return rank_full == rank_inner and min(ratio_full, ratio_inner) >= min_ratio


def random_atomic_measure(rng: np.random.Generator, r: int, l: int, n_atoms: int,
                          min_separation: float = 0.3) -> AtomicMeasure:
    """Atoms with x in [-1, 1]^r, weights in [0.3, 1] and pairwise angular
    separation at least ``min_separation`` (in the max-norm over angles)."""
    for _ in range(1000):
        phi = rng.uniform(-np.pi, np.pi, (n_atoms, l))
        if l and n_atoms > 1:
            d = np.abs(wrap_angle(phi[:, None, :] - phi[None, :, :])).max(axis=2)
            d[np.diag_indices(n_atoms)] = np.inf
            if d.min() < min_separation:
                continue
        x = rng.uniform(-1, 1, (n_atoms, r))
        w = rng.uniform(0.3, 1.0, n_atoms)
        return AtomicMeasure(r, l, x, wrap_angle(phi), w)
    raise RuntimeError("could not place atoms with the requested separation")


def random_flat_instance(rng: np.random.Generator, r: int, l: int, n_atoms: int, min_ratio: float = 1e-6):
    """A random measure with flat, well-conditioned boxes: ``(mu, table)``."""
    m_box, n_box = flat_boxes(r, l, n_atoms)
    for _ in range(200):
        mu = random_atomic_measure(rng, r, l, n_atoms)
        S = moments_from_measure(mu, m_box, n_box)
        if is_flat(S, min_ratio=min_ratio):
            return mu, S
    raise RuntimeError("no flat instance found")
