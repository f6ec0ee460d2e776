"""Exception hierarchy shared across the package."""


class SwarmtuneError(Exception):
    """Base class for every error raised by swarmtune."""


class DimensionError(SwarmtuneError, ValueError):
    """Vector or tensor shapes disagree."""


class DomainError(SwarmtuneError, ValueError):
    """A value lies outside the domain an operation accepts."""


class ConfigError(SwarmtuneError, ValueError):
    """Invalid configuration, unknown names, or unusable inputs."""


class PpmParseError(SwarmtuneError, ValueError):
    """A PPM file could not be decoded. The message names the file."""


class DivergenceError(SwarmtuneError, ArithmeticError):
    """Training produced a non-finite loss."""


class OptimizationError(SwarmtuneError, RuntimeError):
    """An objective evaluation failed mid-search.

    ``partial_trace`` carries every record completed before the failure.
    """

    def __init__(self, message, partial_trace=()):
        super().__init__(message)
        self.partial_trace = list(partial_trace)
