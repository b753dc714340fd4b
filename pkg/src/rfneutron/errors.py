"""Exception hierarchy shared by the simulator modules."""


class SimulationError(Exception):
    """Base class for physics and precondition failures.

    ``element`` names the beamline element that raised, when known.
    """

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element

    def __str__(self):
        msg = super().__str__()
        if self.element:
            return f"{self.element}: {msg}"
        return msg


class ZeroNorm(SimulationError):
    pass


class FrequencyMismatch(SimulationError):
    pass


class BadInput(SimulationError):
    pass


class BadConfig(SimulationError):
    pass


class NotResonant(SimulationError):
    pass


class NotPiPulse(SimulationError):
    pass


class NegativeLadder(SimulationError):
    pass


class BasisTooSmall(SimulationError):
    pass


class NumericalFailure(SimulationError):
    pass


class DegenerateFit(SimulationError):
    pass


class NegativeOffset(SimulationError):
    pass
