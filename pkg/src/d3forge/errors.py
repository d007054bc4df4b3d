"""Exception hierarchy shared by every module.

Each class carries the process exit code the CLI reports for it.
"""


class D3Error(Exception):
    exit_code = 2


class UsageError(D3Error):
    exit_code = 1


class ConfigError(UsageError):
    pass


class DataError(D3Error):
    exit_code = 2


class SchemaError(DataError):
    pass


class MalformedProgramError(DataError):
    pass


class AmbiguityError(DataError):
    """A ``unique`` step saw zero or several objects, or two objects tie on an axis."""


class DimensionError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (token {position})"
        super().__init__(message)
        self.position = position


class VocabularyError(DataError):
    pass


class CapacityError(D3Error):
    exit_code = 3


class UnsatisfiableError(CapacityError):
    pass


class InsufficientSourceError(CapacityError):
    pass
