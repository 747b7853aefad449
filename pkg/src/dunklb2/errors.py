"""Exception types shared across the package."""


class ConvergenceError(ArithmeticError):
    """An iterative evaluation hit its budget before reaching the tolerance."""


class DegenerateInputError(ValueError):
    """Input lies on a locus where the requested representation is undefined
    (mirror lines of the reflection group, zero vectors, ...)."""
