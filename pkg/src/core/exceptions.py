"""Exceptions raised by the nodal domain toolkit.

The CLI maps them to exit codes: domain and geometry errors exit with 1,
configuration errors with 2.
"""


class NodalDomainsError(Exception):
    """Base class for all toolkit errors."""


class OutOfDomainError(NodalDomainsError, ValueError):
    """Input lies outside the validated numerical domain of an operation."""


class GeometryError(NodalDomainsError, ValueError):
    """Degenerate or inconsistent grid geometry."""


class ConfigurationError(NodalDomainsError, ValueError):
    """Invalid configuration value."""
