"""Exception hierarchy shared across the toolkit.

The three leaf categories map onto CLI exit codes: ConfigError -> 1,
DataError -> 2, ProviderError -> 3.
"""


class DedupError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DedupError):
    """Invalid configuration, unknown keys, or bad command usage."""


class DataError(DedupError):
    """Malformed or inconsistent input data (CSV, embedding files, ids)."""


class ProviderError(DedupError):
    """An embedding provider failed or produced invalid output."""
