"""Exception hierarchy shared by every compiler stage."""


class CnnDhmError(Exception):
    """Base class for user-facing compiler errors (CLI exit code 1)."""


class ConfigError(CnnDhmError):
    """Raised when a run configuration is invalid (bad bits, missing file)."""
