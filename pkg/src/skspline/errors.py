"""Exception hierarchy.

Every numerical failure that the CLI maps to exit code 2 derives from
:class:`NumericalFailure`; everything else is a usage/config error.
"""


class SkSplineError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(SkSplineError, ValueError):
    pass


class SizeOverflow(SkSplineError, ValueError):
    pass


class NumericalFailure(SkSplineError, ArithmeticError):
    """A numerical hypothesis of the construction failed."""


class SingularMatrix(NumericalFailure):
    pass


class DegenerateSymbol(NumericalFailure):
    """The periodized symbol came too close to zero."""


class ReconstructionFailure(NumericalFailure):
    """The truncated Fourier series does not reproduce the inverse symbol."""


class IllConditioned(NumericalFailure):
    pass
