"""Exception hierarchy shared by every module."""


class NetInferError(Exception):
    """Base class for all library errors."""


class ParameterError(NetInferError, ValueError):
    """An argument is outside the range an operation accepts."""


class StabilityError(NetInferError):
    """The combination matrix does not define a stable process."""


class IllConditionedError(NetInferError):
    """A linear solve was refused because the system is (nearly) singular."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class DegenerateDataError(NetInferError):
    """Clustering input carries no spread to separate."""


class UndefinedMetricError(NetInferError):
    """A metric's denominator is empty for the given ground truth."""
