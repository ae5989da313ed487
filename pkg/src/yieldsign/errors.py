"""Exception types shared across the package."""


class YieldsignError(Exception):
    """Base class for all package-specific errors."""


class DataError(YieldsignError):
    """Invalid or inconsistent input data (bad CSV, gaps, degenerate series)."""


class ConfigError(YieldsignError):
    """Invalid run configuration."""
