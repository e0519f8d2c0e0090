"""Exception types shared across the package."""


class UsageError(ValueError):
    """Raised when an operation is called with arguments violating its contract."""


class NoEquilibriumError(UsageError):
    """Raised when the mutation operator never moves a plateau point to another plateau point."""
