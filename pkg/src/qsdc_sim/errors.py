"""Exception hierarchy shared by every module of the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class NormalizationError(SimulationError, ValueError):
    pass


class NonUnitaryError(SimulationError, ValueError):
    pass


class LabelCollision(SimulationError, ValueError):
    pass


class CapacityExceeded(SimulationError, ValueError):
    pass


class UnknownLabel(SimulationError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown label"


class ArityMismatch(SimulationError, ValueError):
    pass


class DegenerateState(SimulationError, ValueError):
    pass


class DimensionMismatch(SimulationError, ValueError):
    pass


class LabelMismatch(SimulationError, ValueError):
    pass


class ChannelNotVerified(SimulationError):
    pass


class InsufficientPairs(SimulationError, ValueError):
    pass


class EmptyInput(SimulationError, ValueError):
    pass


class InvalidFraction(SimulationError, ValueError):
    pass


class UnsupportedModel(SimulationError, ValueError):
    pass
