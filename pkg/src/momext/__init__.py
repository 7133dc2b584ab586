"""Commuting self-adjoint extensions via conjugations, and their use in the
truncated power-trigonometric moment problem."""
from .antilinear import Conjugation
from .cayley_extension import (
    CommutingTupleInstance,
    PartialSymmetricOperator,
    build_extension,
    generate_instance,
    validate_hypotheses,
)
from .godic_lucenko import cyclic_decomposition, factor_common_left, factor_common_right, factor_single
from .moment_problem import AtomicMeasure, MomentTable, moments_from_measure, solve, verify_solution
from .numerics import hermitian_eig, joint_diagonalize

__version__ = "0.1.0"
