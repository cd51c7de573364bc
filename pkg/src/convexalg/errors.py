"""Exception hierarchy shared by all modules."""


class ConvexAlgError(Exception):
    """Base class for every error raised by convexalg."""

    #: short machine-readable name used in CLI reports
    clause = "error"


class DimensionMismatch(ConvexAlgError, ValueError):
    clause = "dimension_mismatch"


class UnboundedBody(ConvexAlgError):
    clause = "unbounded_body"


class EmptyGrid(ConvexAlgError):
    clause = "empty_grid"


class OriginNotInterior(ConvexAlgError):
    clause = "origin_not_interior"


class NotSmooth(ConvexAlgError):
    """Raised when differentiating through a pointwise maximum."""

    clause = "not_smooth"


class RestrictionNotConvex(ConvexAlgError):
    clause = "restriction_not_convex"


class InputNotConvex(ConvexAlgError):
    clause = "input_not_convex"


class MonotonicityFailed(ConvexAlgError):
    clause = "monotonicity_failed"


class ApproximantsTooCoarse(ConvexAlgError):
    clause = "approximants_too_coarse"


class OutOfRange(ConvexAlgError):
    clause = "out_of_range"


class DegreeCapExceeded(ConvexAlgError):
    """No scanned degree met the acceptance thresholds.

    ``best`` holds the smallest errors that were observed, keyed by name.
    """

    clause = "degree_cap_exceeded"

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best or {}


class NoSignChangeFound(ConvexAlgError):
    clause = "no_sign_change"


class NotConverged(ConvexAlgError):
    clause = "not_converged"

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class Infeasible(ConvexAlgError):
    clause = "infeasible"


class Unbounded(ConvexAlgError):
    clause = "unbounded"


class NumericallyDegenerate(ConvexAlgError):
    clause = "numerically_degenerate"


class CertificateFailed(ConvexAlgError):
    def __init__(self, clause, message):
        super().__init__(message)
        self.clause = clause
