"""Exception types raised across the package."""


class NpyFormatError(ValueError):
    """Malformed or unsupported NPY header."""


class UnsupportedDtypeError(ValueError):
    """Array dtype outside the supported set."""


class ConfigError(ValueError):
    """A configuration field failed validation.

    The offending field name is kept on ``field`` so callers (and the CLI)
    can report it.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateMapsError(ValueError):
    """Coil maps have zero root-sum-of-squares somewhere."""


class DegenerateSampleError(ValueError):
    """Paired sample cannot be tested (too short or all differences zero)."""


class DivergenceError(FloatingPointError):
    """Optimization produced a non-finite loss or gradient."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = [] if trace is None else trace
