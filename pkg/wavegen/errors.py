"""Exception types raised by wavegen."""


class WavegenError(Exception):
    """Base class for all wavegen errors."""


class FilterError(WavegenError, ValueError):
    """A tap sequence violates the Filter invariants."""


class ZeroDivisorError(WavegenError, ArithmeticError):
    """The n=3 closed form has no completion for the given taps."""


class SolverError(WavegenError, RuntimeError):
    """The solver cannot continue (for example a zero vector to normalize)."""


class ConfigError(WavegenError, ValueError):
    """A SolverConfig is invalid."""


class TransformError(WavegenError, ValueError):
    """A signal, image or decomposition does not fit the bank or mode."""


class FormatError(WavegenError, ValueError):
    """A file is malformed or of the wrong kind."""
