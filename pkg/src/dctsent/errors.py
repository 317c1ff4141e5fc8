"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DctSentError(Exception):
    exit_code = 2


class UsageError(DctSentError):
    exit_code = 1


class DataError(DctSentError):
    """Bad or unreadable input data."""

    exit_code = 2


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionMismatchError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyInputError(DataError):
    pass


class EmptySentenceError(DataError):
    def __init__(self, message="sentence has no in-vocabulary tokens", line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DatasetError(DataError):
    pass


class AlignmentInputError(DataError):
    pass


class NumericalError(DctSentError):
    exit_code = 3


class RankDeficiencyError(NumericalError):
    pass


class InvalidInputError(NumericalError):
    pass


class DegenerateTaskError(DataError):
    pass
