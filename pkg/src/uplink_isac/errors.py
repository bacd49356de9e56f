"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """Input has the wrong shape, value range or structure."""


class SolverError(RuntimeError):
    """A numerical routine could not produce a trustworthy answer.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (iteration counts, residuals, offending matrix name, ...).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ModelConstructionError(SolverError):
    """The stacked observation model could not be built."""


class CapacityError(RuntimeError):
    """An exhaustive search was requested beyond the enumeration budget."""


class ConfigError(ValueError):
    """An experiment configuration is inconsistent or incomplete."""
