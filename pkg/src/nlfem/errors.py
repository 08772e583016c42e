"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter combination or malformed configuration input."""


class NumericalError(RuntimeError):
    """A computation produced nonfinite values or failed to converge."""


class MeshFormatError(ConfigurationError):
    """A mesh or matrix file violates its text format contract."""
