from typing import Optional


class MeroError(Exception):
    """Base class for all toolkit errors."""
    pass


class InvalidArgumentError(MeroError, ValueError):
    """Raised when an operation receives malformed or inconsistent arguments."""
    pass


class DomainError(MeroError, ValueError):
    """Raised when a point lies outside the domain of a Bregman divergence."""
    pass


class NumericError(MeroError, ArithmeticError):
    """Raised when a gradient or step contains non-finite entries."""
    pass


class ConfigurationError(MeroError):
    """Raised when constants, budgets or run settings are unusable."""
    pass


class UnsupportedError(MeroError):
    """Raised when an instance is too large for an exhaustive oracle."""
    pass


class SchemaError(MeroError):
    """Raised when an encoded dataset does not match its documented schema."""

    def __init__(self, message: str, diff: str = ""):
        super().__init__(f"{message}\n{diff}" if diff else message)
        self.diff = diff


class BudgetExhaustedError(MeroError):
    """Raised when an oracle is asked for more samples than its budget allows."""

    def __init__(self, distribution: Optional[int], budget: int, requested: int = 1):
        self.distribution = distribution
        self.budget = budget
        self.requested = requested
        where = f"distribution {distribution}" if distribution is not None else "oracle"
        super().__init__(
            f"Sample budget exhausted for {where}: budget={budget}, requested={requested} more"
        )

    def __reduce__(self):
        # worker processes send errors back pickled
        return (type(self), (self.distribution, self.budget, self.requested))
