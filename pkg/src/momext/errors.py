"""Exception hierarchy.

Two families: ``InputError`` for malformed data (bad shapes, unparsable
files) and ``MathError`` for inputs that are well formed but violate a
mathematical precondition. The CLI maps them to exit codes 1 and 2.
"""


class MomextError(Exception):
    pass


class InputError(MomextError, ValueError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidShape(InputError):
    pass


class IncompleteTable(InputError):
    pass


class MathError(MomextError):
    pass


class NotHermitian(MathError):
    pass


class NotPSD(MathError):
    def __init__(self, message, certificate=None, min_eigenvalue=None):
        super().__init__(message)
        self.certificate = certificate
        self.min_eigenvalue = min_eigenvalue


class NoConvergence(MathError):
    pass


class NotNormal(MathError):
    pass


class NotCommuting(MathError):
    pass


class NotUnitary(MathError):
    pass


class NotAConjugation(MathError):
    pass


class NotSymmetric(MathError):
    pass


class RealShift(MathError):
    pass


class EigenvalueOne(MathError):
    pass


class HypothesisViolation(MathError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConditionBFailed(MathError):
    def __init__(self, message, constants=None):
        super().__init__(message)
        self.constants = constants


class NotFlat(MathError):
    pass
