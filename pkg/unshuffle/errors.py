"""
Exceptions raised by the unshuffle package. The command line front-end maps
them onto exit codes, library code never exits by itself.
"""


class UnshuffleError(Exception):
    """Base class for all errors raised by the package"""


class UsageError(UnshuffleError, ValueError):
    """
    Precondition of an operation was violated by the caller: arity mismatch,
    index out of range, m < n, noise requested in the exact domain, etc.
    """


class NonFiniteData(UnshuffleError):
    """Numeric input contains NaN or infinity"""


class DegenerateDesign(UnshuffleError):
    """Design matrix is (numerically) rank deficient"""


class AmbiguousMatching(UnshuffleError):
    """Two entries are within the tie tolerance, matching is not unique"""


class CapExceeded(UnshuffleError):
    """
    Exact computation hit one of its resource caps. Raised instead of
    returning a possibly wrong answer.
    """


class TheoremViolation(UnshuffleError):
    """The variety of the augmented system is not the single expected point"""


class DenominatorDegenerate(UnshuffleError):
    """Denominator determinant of the Macaulay quotient formula vanished"""


class PivotSingular(UnshuffleError):
    """Bottom n x n block of A is singular"""
