"""Exception hierarchy. Every error is a ``ValueError`` so callers can catch broadly."""


class NmlgError(ValueError):
    pass


class NormalizationError(NmlgError):
    pass


class DimensionError(NmlgError):
    pass


class StateError(NmlgError):
    """Matrix fails the density-matrix invariants."""


class UndefinedError(NmlgError):
    """A quantity has a vanishing denominator (e.g. fidelity of a zero matrix)."""


class SingularityError(NmlgError):
    """Master-equation coefficients diverge at the requested time."""


class DomainError(NmlgError):
    pass


class NullEventError(NmlgError):
    """Conditioning on a measurement outcome of (numerically) zero probability."""


class EmptyResultError(NmlgError):
    pass


class GridError(NmlgError):
    pass


class FormatError(NmlgError):
    pass


class DataError(NmlgError):
    pass


class ScheduleError(NmlgError):
    pass


class ConfigError(NmlgError):
    pass
