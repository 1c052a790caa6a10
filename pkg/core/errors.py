"""
Error types for PyQuadMat
One hierarchy for every module; the CLI maps the three branches to exit codes
"""


class QuadMatError(Exception):
    """Base class of all PyQuadMat errors"""


class AlgebraError(QuadMatError):
    """The input is outside the mathematical contract of an operation"""


class InputError(QuadMatError, ValueError):
    """Malformed input, file or configuration"""


class ExecutionError(QuadMatError):
    """Task engine failures"""


# Algebra

class InexactDivisionError(AlgebraError, ArithmeticError):
    """A division that must be exact left a remainder"""

    def __init__(self, dividend, divisor):
        super().__init__(f"{divisor} does not divide {dividend}")
        self.dividend = dividend
        self.divisor = divisor


class DivisionByZeroError(AlgebraError, ZeroDivisionError):
    pass


class SingularMatrixError(AlgebraError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularLeadingBlockError(AlgebraError):
    """Block inversion met a non-invertible leading block or Schur complement"""

    def __init__(self, path):
        where = "/".join(path) or "root"
        super().__init__(f"non-invertible block at {where}")
        self.path = tuple(path)


class NotTriangularError(AlgebraError):
    pass


class NotSymmetricError(AlgebraError):
    pass


class NotPositiveDefiniteError(AlgebraError):
    def __init__(self, pivot, path, index):
        where = "/".join(path) or "root"
        super().__init__(f"pivot {pivot} <= 0 at diagonal index {index} ({where})")
        self.pivot = pivot
        self.path = tuple(path)
        self.index = index


class NonSquarePivotError(AlgebraError):
    """A rational pivot has no rational square root"""


class InconsistentResiduesError(AlgebraError):
    pass


class UnluckyPrimeExhaustionError(AlgebraError):
    pass


# Input

class IndexOutOfRangeError(InputError, IndexError):
    pass


class DuplicateEntryError(InputError):
    pass


class ShapeMismatchError(InputError):
    pass


class InvalidSpecError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class UnsupportedFieldError(InputError):
    pass


class ConfigError(InputError):
    pass


# Execution

class CycleDetectedError(ExecutionError):
    pass


class WorkerPanicError(ExecutionError):
    def __init__(self, node_id, op, worker_id):
        super().__init__(f"task {node_id} ({op}) failed on worker {worker_id}")
        self.node_id = node_id
        self.op = op
        self.worker_id = worker_id


class ResultMismatchError(ExecutionError):
    pass
