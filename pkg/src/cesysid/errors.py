"""Exception hierarchy shared by the pipeline.

Each class carries a ``category`` the CLI maps onto its exit code.
"""


class CESysIdError(Exception):
    category = "data"


class InvalidInputError(CESysIdError, ValueError):
    """Non-finite or otherwise malformed numeric input."""


class InvalidRangeError(InvalidInputError):
    pass


class ParameterError(CESysIdError, ValueError):
    pass


class DimensionError(CESysIdError, ValueError):
    pass


class InsufficientDataError(CESysIdError, ValueError):
    pass


class SpacingError(CESysIdError, ValueError):
    pass


class AlignmentError(CESysIdError, ValueError):
    pass


class TermParseError(CESysIdError, ValueError):
    pass


class CSVFormatError(CESysIdError, ValueError):
    """Malformed CSV content; ``line`` is the 1-based physical line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DivergenceError(CESysIdError, ArithmeticError):
    category = "numerical"

    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message)


class EvaluationError(CESysIdError, ArithmeticError):
    category = "numerical"

    def __init__(self, message, term=None):
        self.term = term
        super().__init__(message)
