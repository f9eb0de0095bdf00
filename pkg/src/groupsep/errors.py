"""Exception types shared across the package."""


class GroupDynamicsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(GroupDynamicsError, ValueError):
    """Invalid parameter, dimension mismatch, or violated precondition."""


class ScheduleError(GroupDynamicsError):
    """A propagation step needs a coupling interval the schedule does not cover."""


class DegenerateGapError(GroupDynamicsError):
    """Group means coincide, so ratios to the squared mean gap are undefined.

    Semantically the separation indicator is +inf here; callers that
    aggregate over ensembles should count and exclude these samples.
    """


class NoGapError(GroupDynamicsError):
    """The comparison ODE has no real stable/unstable root pair (discriminant <= 0)."""


class InsufficientDataError(GroupDynamicsError):
    """Too few trajectory samples remain after burn-in to measure a rate."""


class SweepError(GroupDynamicsError):
    """An ensemble sweep produced no usable samples for some group size."""
