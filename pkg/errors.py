"""
Exception hierarchy for RSCFixpoint.

Input errors are precondition violations the caller can fix (exit code 2 at
the command line); internal errors signal a broken invariant.
"""


class FixpointError(Exception):
    """Base class for every error raised by this project."""


class InputError(FixpointError, ValueError):
    """Invalid argument, file or precondition supplied by the caller."""


class MappingValidationError(InputError):
    """A mapping definition does not map its domain into itself."""


class DSLError(InputError):
    """Syntax or validation error in a mapping DSL source, with location."""

    def __init__(self, message, line=None, column=None, token=None):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        super().__init__(self._located())

    def _located(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column {self.column}")
        prefix = f"{', '.join(where)}: " if where else ""
        suffix = f" (at {self.token!r})" if self.token else ""
        return f"{prefix}{self.message}{suffix}"


class InternalError(FixpointError):
    """An invariant the code relies on was violated at runtime."""
