"""Shared exception types; the CLI maps them to exit codes."""


class DomainError(ValueError):
    """An argument violates an operation's mathematical preconditions."""


class GridMismatchError(DomainError):
    """Two sampled functions live on incompatible grids."""


class ResourceError(RuntimeError):
    """A computation would exceed its configured size budget."""


class NonConvergenceError(RuntimeError):
    """An adaptive quadrature failed to reach its target accuracy."""
