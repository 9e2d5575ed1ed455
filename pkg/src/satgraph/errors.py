"""Exception types shared across the package.

The CLI maps each family onto a process exit code.
"""


class SatGraphError(Exception):
    exit_code = 1


class ConfigError(SatGraphError, ValueError):
    """Invalid or inconsistent configuration (exit code 2)."""

    exit_code = 2


class DataError(SatGraphError, ValueError):
    """Malformed or inconsistent input data (exit code 3)."""

    exit_code = 3


class NonFiniteError(SatGraphError, FloatingPointError):
    """A NaN or Inf surfaced in a forward value, loss or gradient (exit code 4)."""

    exit_code = 4


class DivergenceError(NonFiniteError):
    """Training produced a non-finite loss; ``epoch`` is where it happened."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class ShapeError(SatGraphError, ValueError):
    """Operand shapes are incompatible for the requested operation."""
