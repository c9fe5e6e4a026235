"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, InputError -> 3,
NumericError -> 4, OSError -> 5.
"""


class DiachronError(Exception):
    """Base class for all diachron-specific failures."""


class ConfigError(DiachronError):
    """Invalid configuration value or combination."""


class InputError(DiachronError):
    """Malformed, inconsistent, or missing input data."""


class NumericError(DiachronError):
    """A numeric stage cannot proceed (e.g. k exceeds the document count)."""
