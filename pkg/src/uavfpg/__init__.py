"""UAV frequency-point game simulator.

An ally UAV keeps its base-station link alive with frequency hopping and
spread spectrum while an opponent UAV pursues it and jams.
"""

__version__ = "0.1.0"


class FpgError(Exception):
    """Base class for errors raised by this package."""


class InvalidTrajectoryError(FpgError, ValueError):
    pass


class EncodingError(FpgError, ValueError):
    pass


class ConfigError(FpgError, ValueError):
    pass


class InsufficientObservationError(FpgError, ValueError):
    pass


class PlannerParseError(FpgError, ValueError):
    pass


class CheckpointError(FpgError, ValueError):
    pass
