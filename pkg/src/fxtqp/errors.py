"""Exception types shared across the package."""


class FxtqpError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(FxtqpError, ValueError):
    """A numeric parameter violates its invariant (e.g. c1 <= 0, mu <= 1)."""


class PreconditionError(FxtqpError, ValueError):
    """An operation was called outside its stated domain."""


class GeometryError(FxtqpError, ValueError):
    """Road or vehicle geometry is degenerate (e.g. s_dx <= 0)."""


class DegenerateBoundError(FxtqpError, ArithmeticError):
    """A closed-form bound degenerates (repeated roots, log(0))."""


class SettleTimeoutError(FxtqpError, RuntimeError):
    """The numeric settling-time oracle did not converge within its horizon."""


class BudgetError(FxtqpError, ValueError):
    """A phase time budget cannot be computed (overtake impossible)."""


class ConfigError(FxtqpError, ValueError):
    """A configuration file is malformed or violates a type invariant."""
