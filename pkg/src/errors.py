"""Exception hierarchy shared by every CAMPD module."""

from __future__ import annotations


class CampdError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(CampdError, ValueError):
    """Operands of a primitive have incompatible shapes."""

    def __init__(self, op: str, *shapes: tuple[int, ...], detail: str = "") -> None:
        rendered = " vs ".join(str(tuple(shape)) for shape in shapes)
        message = f"{op}: shape mismatch {rendered}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
        self.op = op
        self.shapes = shapes


class AutogradError(CampdError, RuntimeError):
    pass


class DimensionError(CampdError, ValueError):
    pass


class EnvironmentSamplingError(CampdError, RuntimeError):
    pass


class ProblemSamplingError(CampdError, RuntimeError):
    pass


class PlannerNotFound(CampdError, RuntimeError):
    """RRT-Connect exhausted its iteration budget without connecting the trees."""


class NormalizationRangeError(CampdError, ValueError):
    pass


class EmptyDatasetError(CampdError, ValueError):
    pass


class SplitError(CampdError, ValueError):
    pass


class ContextTypeError(CampdError, LookupError):
    pass


class TimestepError(CampdError, ValueError):
    pass


class ScheduleError(CampdError, ValueError):
    pass


class TrainingDivergedError(CampdError, RuntimeError):
    pass


class ConfigError(CampdError, ValueError):
    pass


class SerializationError(CampdError, ValueError):
    pass


class CheckpointError(CampdError, RuntimeError):
    pass
