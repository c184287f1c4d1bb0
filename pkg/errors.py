"""Exception types shared by the estimation modules and the CLI."""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class RobustMeanError(Exception):
    """Base class for every error raised on purpose by this package."""


class ContractViolation(RobustMeanError, ValueError):
    """Inputs break an operation's preconditions (shapes, ranges, indices)."""


class ParameterError(RobustMeanError, ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class DataError(RobustMeanError):
    """A data or report file could not be parsed or is inconsistent."""


class UsageError(RobustMeanError):
    """The command line was used incorrectly."""


class EmptySupportError(RobustMeanError):
    """Thresholding left no weight for the Step-2 mean."""
