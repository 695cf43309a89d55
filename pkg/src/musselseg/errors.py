"""Exception types raised across the package."""


class MusselsegError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MusselsegError, ValueError):
    pass


class ConfigError(MusselsegError, ValueError):
    pass


class DecodeError(MusselsegError, ValueError):
    pass


class ParseError(MusselsegError, ValueError):
    """CSV parse failure; ``line`` is the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
