"""Exception types shared across the package."""


class GmmNetsError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(GmmNetsError, ValueError):
    """An input has the wrong shape for the operation."""


class NotPositiveDefinite(GmmNetsError, ValueError):
    """A covariance matrix is asymmetric, indefinite, or numerically singular."""


class SpecValidationError(GmmNetsError, ValueError):
    """A mixture-specification document violates an invariant.

    ``path`` points to the offending location in the document, e.g.
    ``classes[1].components[0].covariance``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class NonFiniteIntermediate(GmmNetsError, ArithmeticError):
    """A network forward pass produced NaN or Inf (a construction bug)."""


class ParseError(GmmNetsError, ValueError):
    """A serialized artifact could not be parsed.

    ``location`` names the offending field.
    """

    def __init__(self, location, message):
        self.location = location
        super().__init__(f"{location}: {message}")


class AssumptionViolated(GmmNetsError, ValueError):
    """An activation function failed a regularity check required by a builder."""


class AssumptionNotVerified(GmmNetsError, ValueError):
    """A construction was requested for an activation whose checks did not pass."""


class DeltaOutOfRange(GmmNetsError, ValueError):
    """Relative accuracy target outside the valid range (0, 2)."""


class QOutOfRange(GmmNetsError, ValueError):
    """Tail probability outside its valid range."""
