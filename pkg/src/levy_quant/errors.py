"""Exception hierarchy shared by every module.

Each class carries an optional ``context`` mapping that the CLI serialises
into its machine-readable error report.
"""
from __future__ import annotations


class LevyError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str = "", **context):
        super().__init__(message)
        self.context = context

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "context": self.context}


class StripViolation(LevyError):
    """Argument lies outside the exponential-moment strip."""


class IntegrationFailure(LevyError):
    """Quadrature did not reach the requested tolerance."""


class Undecidable(LevyError):
    """Numeric tail behaviour too close to the convergence boundary to decide."""


class BesselDomainError(LevyError):
    """Complex Bessel-K evaluation failed its runtime validation."""


class DensityUnknown(LevyError):
    """No closed-form density for this family/horizon."""


class ParameterMismatch(LevyError):
    pass


class NoRoot(LevyError):
    pass


class DegenerateCase(LevyError):
    pass


class InvalidGrid(LevyError):
    pass


class UnsupportedModel(LevyError):
    pass


class RegionTouchesOrigin(LevyError):
    pass


class JumpBelowMinusOne(LevyError):
    pass


class EmptyIntersection(LevyError):
    """No damping R satisfies both the payoff strip and the cf strip."""


class CFLViolation(LevyError):
    pass


class ArbitrageViolation(LevyError):
    pass


class NonConvergence(LevyError):
    pass


class DegenerateData(LevyError):
    pass


class ParseError(LevyError):
    def __init__(self, message: str = "", line: int | None = None, **context):
        super().__init__(message, line=line, **context)
        self.line = line


class ConfigError(LevyError):
    pass


class QuadratureWarning(UserWarning):
    """Transform price had to be clipped into the no-arbitrage interval."""
