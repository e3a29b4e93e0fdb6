"""Exception hierarchy shared by every qac module."""


class QacError(Exception):
    """Base class for all engine errors."""


class ArgumentError(QacError, ValueError):
    pass


class RangeError(QacError, IndexError):
    pass


class UnitarityError(QacError, ValueError):
    pass


class NoMeasureError(QacError):
    pass


class NoClbitsError(QacError):
    pass


class UndefinedNameError(QacError, LookupError):
    """Raised when a circuit, simulator or label name was never defined."""


class CompositionError(QacError):
    pass


class UnsupportedError(QacError):
    pass


class UnsupportedExportError(UnsupportedError):
    pass


class ProportionError(QacError):
    pass


class WireError(QacError, ValueError):
    pass


class ParseError(QacError):
    """Syntax error with an optional line/column position (1-based)."""

    def __init__(self, message, *, token=None, line=None, column=None):
        self.message = message
        self.token = token
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class IoError(QacError, OSError):
    """An output file could not be written."""
