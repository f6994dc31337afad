"""Exception hierarchy.

Every failure carries the data needed to audit it (witness points, residuals),
so callers can turn an exception straight into a report entry.
"""


class ConvexCertError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class DimensionMismatch(ConvexCertError, ValueError):
    pass


class NonConvergence(ConvexCertError):
    """An iterative solver hit its budget; ``details['residual']`` is the best achieved."""


class PointInsideSet(ConvexCertError):
    pass


class SetsIntersect(ConvexCertError):
    """The sets share a point; ``details['witness']`` is one."""


class BudgetExceeded(ConvexCertError):
    pass


class InfeasibleIntersection(ConvexCertError):
    """Joint LP infeasible; ``details['certificate']`` is the least sup-norm violation."""


class CoverGap(ConvexCertError):
    pass


class ResolutionInsufficient(ConvexCertError):
    pass


class StructureViolation(ConvexCertError):
    pass


class PrecondViolated(ConvexCertError):
    pass


class TheoremViolation(ConvexCertError):
    """A guaranteed inequality failed numerically; indicates misuse of tags or grids."""


class NonpositiveAlpha(ConvexCertError, ValueError):
    pass


class QuasiconvexityViolated(ConvexCertError):
    pass


class CoercivityRadiusMissing(ConvexCertError):
    pass


class NotSelfMap(ConvexCertError):
    pass


class CommutativityViolated(ConvexCertError):
    pass


class EmptySlice(ConvexCertError):
    pass
