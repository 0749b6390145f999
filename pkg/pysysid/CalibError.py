class CalibError(Exception):
    """Base class of every error raised by pysysid"""
    def __init__(self, message, *args):
        super().__init__(message)

class LayoutError(CalibError, ValueError):
    """Two parameter or control layouts that should match do not"""

class BoundsError(CalibError, ValueError):
    """A bounds entry is malformed (min >= max, duplicate name, unknown kind, ...)"""

class InvalidChannelError(CalibError, IndexError):
    """Control channel index out of range"""

class UnknownPlatformError(CalibError, KeyError):
    """Platform, rig or setting name is not known"""
    def __str__(self):
        return str(self.args[0]) if self.args else ""

class DivergedSimulationError(CalibError):
    """
    A simulator state became non-finite or left the divergence guard

    Attributes:
        step (int): First bad internal step (counted from the start of the settle phase)
        time (float): Simulation time of that step in seconds
    """
    def __init__(self, message, step:int=None, time:float=None):
        super().__init__(message)
        self.step = step
        self.time = time

class DegenerateGeometryError(CalibError, ValueError):
    """Zero-length polyline or a skeleton too short to resample"""

class UnrecoverablePerceptionError(CalibError):
    """Every frame of a sequence is missing"""

class InsufficientOverlapError(CalibError):
    """Aligned or trimmed trajectories do not overlap long enough"""

class MetricMismatchError(CalibError, ValueError):
    """Trajectories or metric do not agree on fps / point count"""

class RecommenderUnavailableError(CalibError):
    """The recommender cannot produce a proposal (e.g. endpoint unreachable after retries)"""

class ResponseParseError(CalibError):
    """The recommender answered, but the answer could not be parsed"""

class NoValidIterationError(CalibError):
    """All iterations of a history diverged"""

class EmptyInputError(CalibError, ValueError):
    """An aggregation received nothing to aggregate"""

class MissingRecordingError(CalibError, KeyError):
    """Replay mode has no recording for the requested profile / repeat"""
    def __str__(self):
        return str(self.args[0]) if self.args else ""

class ConfigError(CalibError, ValueError):
    """
    Invalid experiment configuration

    Attributes:
        field (str): Name of the offending field
    """
    def __init__(self, message, field:str=None):
        super().__init__(message)
        self.field = field
