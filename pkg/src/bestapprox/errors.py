"""Exception types raised across the package."""


class BestApproxError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(BestApproxError, ValueError):
    pass


class InvalidNorm(BestApproxError, ValueError):
    pass


class ZeroVector(BestApproxError, ValueError):
    pass


class NonsmoothPoint(BestApproxError, ValueError):
    """The norm has no Gateaux derivative at the requested point."""


class ZeroFunctional(BestApproxError, ValueError):
    pass


class NotOnUnitSphere(BestApproxError, ValueError):
    pass


class InvalidSet(BestApproxError, ValueError):
    pass


class UnsupportedVariant(BestApproxError, TypeError):
    """The operation is not defined for this kind of closed set."""


class PointInSet(BestApproxError, ValueError):
    """The base point lies in K, so d_K vanishes and the request is degenerate."""


class NonDifferentiablePoint(BestApproxError, ValueError):
    """One-sided directional derivatives of d_K disagree at the base point."""


class StepTooSmall(BestApproxError, ValueError):
    """Finite-difference steps would resolve solver noise rather than d_K."""


class ConfigError(BestApproxError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
