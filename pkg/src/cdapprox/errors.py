"""Exception types shared across the package."""


class MomentFileError(ValueError):
    """A moment-matrix file is malformed or inconsistent with its header."""


class IndefiniteMatrixError(ArithmeticError):
    """A matrix that must be positive semidefinite has a clearly negative eigenvalue."""


class BoundViolationError(RuntimeError):
    """An empirical check exceeded its theoretical bound."""
