"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid user-facing configuration (bad cell count, non-integer T/tau, unknown key)."""


class SolveFailure(RuntimeError):
    """A linear solve missed its residual contract or broke down.

    Carries the offending SolveReport in .report when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonConvergence(RuntimeError):
    """Fixed-point iteration hit its cap before reaching tolerance."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats
