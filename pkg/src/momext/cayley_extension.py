"""Self-adjoint extensions of a partially defined symmetric operator that
commute with a bounded Hermitian / unitary tuple.

The extension is assembled as the inverse Cayley transform of
``V1 + U24``: ``V1`` is the Cayley transform of ``A1`` on its domain and
maps ``H1 = (A1 - z0) D`` onto ``H3 = (A1 - conj(z0)) D``, while
``U24 = J K`` maps the deficiency space ``H2 = H1^perp`` onto
``H4 = H3^perp``; ``K`` is the shared left conjugation factor of the
Cayley transforms of ``A_rest`` and the unitaries ``B``, compressed to
``H2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .antilinear import Conjugation
from .errors import (
    EigenvalueOne,
    HypothesisViolation,
    InvalidShape,
    NotSymmetric,
    NotUnitary,
    RealShift,
)
from .godic_lucenko import factor_common_left
from .numerics import (
    DEFAULT_TOL,
    Subspace,
    as_matrix,
    as_square,
    commutator,
    dagger,
    fro,
    hermitian_eig,
    joint_diagonalize,
    orthogonal_complement,
    orthonormalize,
    pinv_with_range,
    random_orthogonal,
    unitarity_defect,
)


@dataclass(frozen=True, eq=False)
class PartialSymmetricOperator:
    """Operator defined on ``domain``; ``action`` maps domain coordinates
    (coefficients in ``domain.basis``) to ambient vectors."""

    ambient_dim: int
    domain: Subspace
    action: np.ndarray

    def __post_init__(self):
        action = as_matrix(self.action).reshape(self.ambient_dim, self.domain.dim)
        object.__setattr__(self, "action", action)

    @classmethod
    def restrict(cls, A, domain: Subspace) -> "PartialSymmetricOperator":
        A = as_square(A)
        return cls(A.shape[0], domain, A @ domain.basis)

    @classmethod
    def total(cls, A) -> "PartialSymmetricOperator":
        A = as_square(A)
        return cls.restrict(A, Subspace.full(A.shape[0]))

    @property
    def is_total(self) -> bool:
        return self.domain.dim == self.ambient_dim

    def compression(self) -> np.ndarray:
        """Matrix of ``P_D A`` on the domain basis."""
        return dagger(self.domain.basis) @ self.action

    def matrix(self) -> np.ndarray:
        """Ambient matrix that agrees with the operator on its domain and
        vanishes on the orthogonal complement."""
        return self.action @ dagger(self.domain.basis)

    def symmetry_defect(self) -> float:
        S = self.compression()
        return fro(S - dagger(S))

    def apply(self, f) -> np.ndarray:
        """Apply to an ambient vector lying in the domain."""
        return self.action @ (dagger(self.domain.basis) @ np.asarray(f, dtype=complex))


@dataclass(frozen=True, eq=False)
class CommutingTupleInstance:
    ambient_dim: int
    A1: PartialSymmetricOperator
    A_rest: list = field(default_factory=list)
    B_list: list = field(default_factory=list)
    J: Conjugation | None = None
    z0: complex = 1j

    def __post_init__(self):
        n = self.ambient_dim
        object.__setattr__(self, "A_rest", [as_square(A) for A in self.A_rest])
        object.__setattr__(self, "B_list", [as_square(B) for B in self.B_list])
        if self.J is None:
            object.__setattr__(self, "J", Conjugation.plain(n))
        object.__setattr__(self, "z0", complex(self.z0))
        for X in self.A_rest + self.B_list:
            if X.shape != (n, n):
                raise InvalidShape(f"operator of shape {X.shape} in a tuple of dim {n}")
        if self.A1.ambient_dim != n or self.J.dim != n:
            raise InvalidShape("A1 / J dimension does not match ambient_dim")


@dataclass(frozen=True, eq=False)
class DeficiencyData:
    H1: Subspace
    H2: Subspace
    H3: Subspace
    H4: Subspace
    V1: np.ndarray


def _op_norm_scale(*mats) -> float:
    return max([1.0] + [fro(M) for M in mats])


def cayley(A1: PartialSymmetricOperator, z0: complex = 1j, tol: float = DEFAULT_TOL) -> DeficiencyData:
    """Cayley transform of a partial symmetric operator and its deficiency spaces.

    ``V1`` is returned as an ambient matrix: it sends ``(A1 - z0) f`` to
    ``(A1 - conj(z0)) f`` and vanishes on ``H2``.
    """
    z0 = complex(z0)
    if z0.imag == 0:
        raise RealShift("z0 must have nonzero imaginary part")
    scale = _op_norm_scale(A1.action)
    d = A1.symmetry_defect()
    if d > tol * scale:
        raise NotSymmetric(f"symmetry defect {d:.3e} on the domain")
    Q = A1.domain.basis
    X1 = A1.action - z0 * Q
    X3 = A1.action - z0.conjugate() * Q
    n = A1.ambient_dim
    # (A1 - z0) is injective with ||(A1 - z0) f|| >= |Im z0| ||f||; keep all columns.
    H1 = orthonormalize(X1, tol=1e-14) if Q.shape[1] else Subspace.zero(n)
    H3 = orthonormalize(X3, tol=1e-14) if Q.shape[1] else Subspace.zero(n)
    if Q.shape[1]:
        pinv, _ = pinv_with_range(X1, tol=1e-14)
        V1 = X3 @ pinv
    else:
        V1 = np.zeros((n, n), dtype=complex)
    return DeficiencyData(H1, orthogonal_complement(H1), H3, orthogonal_complement(H3), V1)


def cayley_matrix(A, z0: complex = 1j, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``(A - conj(z0)) (A - z0)^{-1}`` for a Hermitian matrix A."""
    z0 = complex(z0)
    if z0.imag == 0:
        raise RealShift("z0 must have nonzero imaginary part")
    lam, V = hermitian_eig(A, tol=tol)
    return (V * ((lam - z0.conjugate()) / (lam - z0))) @ dagger(V)


def inverse_cayley(W, z0: complex = 1j, tol: float = DEFAULT_TOL, seed: int = 0) -> np.ndarray:
    """Hermitian ``A = (z0 W - conj(z0)) (W - I)^{-1}`` for a unitary W.

    Raises ``EigenvalueOne`` when W has an eigenvalue within ``tol`` of 1:
    the inverse transform is then a self-adjoint relation, not an operator.
    """
    W = as_square(W)
    z0 = complex(z0)
    if z0.imag == 0:
        raise RealShift("z0 must have nonzero imaginary part")
    n = W.shape[0]
    d = unitarity_defect(W)
    if d > tol * max(n, 1) * 10:
        raise NotUnitary(f"unitarity defect {d:.3e}")
    spec = joint_diagonalize([W], tol=max(tol, 1e-10), seed=seed)
    lam = spec.eigenvalue_lists[0]
    lam = lam / np.abs(lam)
    gap = np.abs(lam - 1)
    if n and gap.min() <= tol:
        raise EigenvalueOne(f"unitary has an eigenvalue at distance {gap.min():.3e} from 1")
    # (z0 w - conj z0)/(w - 1) is real on the unit circle.
    f = ((z0 * lam - z0.conjugate()) / (lam - 1)).real
    V = spec.eigenbasis
    A = (V * f) @ dagger(V)
    return (A + dagger(A)) / 2


# ---------------------------------------------------------------------------
# Hypothesis checks


@dataclass(frozen=True)
class Check:
    name: str
    defect: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.threshold


@dataclass(frozen=True)
class HypothesisReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def defect(self, name: str) -> float:
        return max(c.defect for c in self.checks if c.name == name)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            flag = "ok " if c.passed else "FAIL"
            lines.append(f"{flag} {c.name}: {c.defect:.3e} (<= {c.threshold:.1e})")
        return "\n".join(lines)


def validate_hypotheses(T: CommutingTupleInstance, tol: float = DEFAULT_TOL) -> HypothesisReport:
    """Numerical defects for every hypothesis needed by ``build_extension``.

    Each defect is compared against ``tol`` times a norm scale of the
    operators involved.
    """
    n = T.ambient_dim
    Q = T.A1.domain.basis
    act = T.A1.action
    PD_perp = np.eye(n) - T.A1.domain.projector()
    M = T.J.matrix
    checks = []

    def add(name, defect, *scale_mats):
        checks.append(Check(name, float(defect), tol * _op_norm_scale(*scale_mats)))

    add("A1 symmetric on domain", T.A1.symmetry_defect(), act)
    for j, A in enumerate(T.A_rest, start=2):
        add(f"A{j} Hermitian", fro(A - dagger(A)), A)
        add(f"A{j} maps domain into domain", fro(PD_perp @ A @ Q), A)
        # A_j A1 f = A1 A_j f for f in the domain.
        add(f"A{j} commutes with A1 on domain", fro(A @ act - T.A1.apply(A @ Q)), A, act)
    for k, B in enumerate(T.B_list, start=1):
        add(f"B{k} unitary", unitarity_defect(B), B)
        add(f"B{k} maps domain onto domain", fro(PD_perp @ B @ Q) + fro(PD_perp @ dagger(B) @ Q), B)
        add(f"B{k} commutes with A1 on domain", fro(B @ act - T.A1.apply(B @ Q)), B, act)
    ops = T.A_rest + T.B_list
    names = [f"A{j}" for j in range(2, len(T.A_rest) + 2)] + [f"B{k}" for k in range(1, len(T.B_list) + 1)]
    for a in range(len(ops)):
        for b in range(a + 1, len(ops)):
            add(f"{names[a]} commutes with {names[b]}", fro(commutator(ops[a], ops[b])), ops[a], ops[b])

    add("J maps domain into domain", fro(PD_perp @ M @ Q.conj()), M)
    add("J commutes with A1", fro(T.A1.apply(M @ Q.conj()) - M @ act.conj()), act)
    for j, A in enumerate(T.A_rest, start=2):
        add(f"J commutes with A{j}", fro(A @ M - M @ A.conj()), A)
    for k, B in enumerate(T.B_list, start=1):
        # B J = J B^{-1}  <=>  B M = M conj(B^H) = M B^T
        add(f"B{k} J = J B{k}^-1", fro(B @ M - M @ B.T), B)

    if T.z0.imag == 0:
        checks.append(Check("z0 non-real", 1.0, 0.0))
        return HypothesisReport(tuple(checks))
    if T.A1.symmetry_defect() > tol * _op_norm_scale(act):
        return HypothesisReport(tuple(checks))
    defi = cayley(T.A1, T.z0, tol=np.inf)
    for name, H in (("H1", defi.H1), ("H3", defi.H3)):
        Pp = np.eye(n) - H.projector()
        for k, B in enumerate(T.B_list, start=1):
            add(f"B{k} {name} = {name}", fro(Pp @ B @ H.basis) + fro(Pp @ dagger(B) @ H.basis), B)
    P1p = np.eye(n) - defi.H1.projector()
    for j, A in enumerate(T.A_rest, start=2):
        add(f"A{j} leaves H1 invariant", fro(P1p @ A @ defi.H1.basis), A)
        S = dagger(defi.H1.basis) @ A @ defi.H1.basis
        add(f"A{j} Hermitian on H1", fro(S - dagger(S)), A)
    P4p = np.eye(n) - defi.H4.projector()
    add("J H2 = H4", fro(P4p @ M @ defi.H2.basis.conj()), M)
    for k, B in enumerate(T.B_list, start=1):
        g = defi.H1.basis
        add(f"B{k} V1 = V1 B{k} on H1", fro(B @ defi.V1 @ g - defi.V1 @ B @ g), B, defi.V1)
    return HypothesisReport(tuple(checks))


# ---------------------------------------------------------------------------
# Extension


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    A1_hat: np.ndarray
    deficiency: DeficiencyData | None
    K: Conjugation | None
    L_list: list
    U24: np.ndarray | None
    report: HypothesisReport
    defects: dict


def extension_defects(T: CommutingTupleInstance, A_hat) -> dict:
    """Extension, self-adjointness and (relative) commutation defects."""
    A_hat = np.asarray(A_hat)
    ext = max(
        (np.linalg.norm(A_hat @ T.A1.domain.basis[:, i] - T.A1.action[:, i]) for i in range(T.A1.domain.dim)),
        default=0.0,
    )
    nrm = max(fro(A_hat), 1e-300)
    herm = fro(A_hat - dagger(A_hat)) / nrm
    comm = [
        fro(commutator(A_hat, X)) / (nrm * max(fro(X), 1e-300))
        for X in list(T.A_rest) + list(T.B_list)
    ]
    return {"extension": float(ext), "self_adjointness": float(herm), "commutation": [float(c) for c in comm]}


def build_extension(T: CommutingTupleInstance, tol: float = DEFAULT_TOL, seed: int = 0) -> ExtensionResult:
    """Self-adjoint ``A1_hat`` extending ``A1`` and commuting with the tuple."""
    report = validate_hypotheses(T, tol)
    if not report.passed:
        names = ", ".join(c.name for c in report.failures)
        raise HypothesisViolation(f"hypotheses fail: {names}", report=report)
    n = T.ambient_dim
    if T.A1.is_total:
        A = T.A1.matrix()
        A = (A + dagger(A)) / 2
        return ExtensionResult(A, None, None, [], None, report, extension_defects(T, A))

    defi = cayley(T.A1, T.z0, tol=tol)
    Q2 = defi.H2.basis
    compressed = [dagger(Q2) @ cayley_matrix(A, 1j) @ Q2 for A in T.A_rest]
    compressed += [dagger(Q2) @ B @ Q2 for B in T.B_list]
    if compressed:
        K, Ls = factor_common_left(compressed, tol=max(tol, 1e-10), seed=seed)
    else:
        K, Ls = Conjugation.plain(Q2.shape[1]), []
    # x in H2 -> J(Q2 K(Q2^H x)) = M_J conj(Q2) conj(M_K) Q2^H x
    U24 = T.J.matrix @ Q2.conj() @ K.matrix.conj() @ dagger(Q2)
    W = defi.V1 + U24
    try:
        A_hat = inverse_cayley(W, T.z0, tol=tol, seed=seed)
    except EigenvalueOne as exc:
        raise EigenvalueOne(
            f"{exc}; U24 = J K with K the shared left factor of {len(compressed)} "
            f"compressed operator(s) on the {Q2.shape[1]}-dim deficiency space"
        ) from exc
    return ExtensionResult(A_hat, defi, K, Ls, U24, report, extension_defects(T, A_hat))


# ---------------------------------------------------------------------------
# Instances


def generate_instance(ambient_dim: int, codim: int, rho: int, tau: int, seed: int, z0: complex = 1j):
    """Random tuple satisfying every hypothesis of ``build_extension``.

    All operators share a real orthogonal eigenbasis O; A-spectra are real,
    B-spectra unit-modulus and bounded away from 1, J is entrywise
    conjugation (``M = O O^T = I``), and the domain is spanned by the first
    ``ambient_dim - codim`` columns of O.
    """
    if not (0 <= codim < ambient_dim) or rho < 1 or tau < 0:
        raise InvalidShape(f"invalid instance shape ({ambient_dim}, {codim}, {rho}, {tau})")
    rng = np.random.default_rng(seed)
    O = random_orthogonal(ambient_dim, rng)
    Od = O[:, : ambient_dim - codim]

    def herm():
        return (O * rng.uniform(-2, 2, ambient_dim)) @ O.T

    def unit():
        theta = rng.uniform(0.2, 2 * np.pi - 0.2, ambient_dim)
        return (O * np.exp(1j * theta)) @ O.T

    A1_full = herm()
    domain = Subspace(ambient_dim, Od)
    A1 = PartialSymmetricOperator(ambient_dim, domain, A1_full @ Od)
    return CommutingTupleInstance(
        ambient_dim,
        A1,
        [herm() for _ in range(rho - 1)],
        [unit() for _ in range(tau)],
        Conjugation(O @ O.T),
        z0,
    )


def rotate_instance(T: CommutingTupleInstance, V) -> CommutingTupleInstance:
    """The same tuple expressed in the basis given by the unitary V."""
    V = as_square(V)
    Vh = dagger(V)
    domain = Subspace(T.ambient_dim, V @ T.A1.domain.basis)
    A1 = PartialSymmetricOperator(T.ambient_dim, domain, V @ T.A1.action)
    return CommutingTupleInstance(
        T.ambient_dim,
        A1,
        [V @ A @ Vh for A in T.A_rest],
        [V @ B @ Vh for B in T.B_list],
        Conjugation(V @ T.J.matrix @ V.T),
        T.z0,
    )
