"""Exception types shared by the library and the command-line driver."""


class ToolError(Exception):
    """Base class for errors that carry a CLI exit code."""

    exit_code = 1


class ConfigError(ToolError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class DataError(ToolError):
    """Malformed or incomplete input data."""

    exit_code = 3


class InfeasibleError(ToolError):
    """A computation cannot proceed: bad geometry, too little history, ..."""

    exit_code = 4
