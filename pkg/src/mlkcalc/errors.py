"""Exception hierarchy.

Validation problems derive from :class:`ValueError`; numerical failures derive
from :class:`ArithmeticError`.  The CLI maps the two families onto distinct
exit codes.
"""


class MLKCalcError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MLKCalcError, ValueError):
    """Input outside an operation's preconditions."""


class NumericalError(MLKCalcError, ArithmeticError):
    """A computation could not deliver a trustworthy value."""


class PoleError(ValidationError):
    """Gamma evaluated at a nonpositive integer."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operator."""


class DegenerateK(ValidationError):
    """``k = (1 - alpha) A / B(alpha)`` equals one for a non-degenerate family."""


class ComplexRoot(ValidationError):
    """A real square root was requested of a negative number."""


class NoConvergence(NumericalError):
    """A series hit its term cap before meeting the tolerance."""


class OscillationError(NumericalError):
    """Talbot contour terms fail to decay; the contour is unsuitable."""


class BranchAmbiguity(NumericalError):
    """The two roots of a quadratic cannot be told apart reliably."""


class DiscriminantZero(NumericalError):
    """The quadratic discriminant vanishes on the inversion contour."""


class DenominatorZero(NumericalError):
    """A recursion denominator vanishes."""
