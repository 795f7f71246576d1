"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConfigurationError(ValueError):
    """A grid, scan or run configuration cannot be used as given."""


class NumericalAssertionError(AssertionError):
    """A numerical cross-check (PDE vs Monte Carlo, oracle, ...) failed."""
