"""Exception hierarchy for rispace."""


class RispaceError(Exception):
    """Base class for all library errors."""


class DescriptorError(RispaceError, ValueError):
    """Malformed function/generator/exponent descriptor or JSON document."""


class DomainError(RispaceError, ValueError):
    """Argument outside the documented domain of an operation."""


class OverlapError(RispaceError, ValueError):
    """Supports of summands intersect in a set of positive measure."""


class DegenerateError(RispaceError, ValueError):
    """A construction needs a nonzero function and received the zero function."""


class ConcavityViolation(RispaceError):
    """A generator failed the grid certificate for the concave class."""


class PreconditionFailure(RispaceError):
    """Mathematical hypotheses of a construction are not met.

    ``details`` carries the offending objects so reports can list them.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or []


class CatalogMiss(RispaceError):
    """No built-in escape witness is known for a pair of generators."""


class ExtractionFailure(RispaceError):
    """Disjoint level sets could not be extracted from an exponent."""
