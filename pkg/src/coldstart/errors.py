"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class ConfigError(ValueError):
    """Invalid experiment or sweep configuration."""


class DataError(ValueError):
    """Malformed or inconsistent embedding data (file contents, pools, splits)."""
