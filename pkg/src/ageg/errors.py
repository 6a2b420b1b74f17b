"""Exception types shared across the package."""


class AgegError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(AgegError):
    """Invalid configuration, parameter value, or schema violation."""


class InvalidRegimeError(ConfigError):
    """Operation requires a regime (e.g. strong convexity) the problem lacks."""


class ScheduleViolationError(ConfigError):
    """A stepsize outside its admissible range was requested."""


class DegenerateProblemError(AgegError):
    """Problem data makes the requested quantity undefined (e.g. lam_max = 0)."""


class NoUniqueSaddleError(AgegError):
    """The stationarity system is singular; no unique saddle point exists."""


class DivergedError(AgegError):
    """Iterates left the float range. Carries the partial trace for inspection."""

    def __init__(self, message, trace=None, seed=None):
        super().__init__(message)
        self.trace = trace
        self.seed = seed
