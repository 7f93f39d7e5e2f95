"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the command layer can
translate any library failure into the documented status without a lookup
table.
"""


class EsnCausalError(Exception):
    exit_code = 1


class ArgumentError(EsnCausalError, ValueError):
    """Bad argument value (fraction out of range, empty grid, ...)."""

    exit_code = 2


class DataError(EsnCausalError, ValueError):
    """Input data unusable for the requested operation."""

    exit_code = 3


class FormatError(DataError):
    """Malformed CSV or JSON input."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} (at {', '.join(where)})"
        super().__init__(message)


class DegenerateColumnError(DataError):
    """A column is constant, empty, or otherwise unusable."""

    def __init__(self, message, columns=()):
        self.columns = list(columns)
        super().__init__(message)


class NumericalError(EsnCausalError, ArithmeticError):
    """Factorization failure, singular system, non-finite data."""

    exit_code = 4
