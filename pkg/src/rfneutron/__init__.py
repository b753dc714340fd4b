"""Polarized neutron interferometer with two RF flippers, plus a quantized-field
(Jaynes-Cummings) cross-check of the semiclassical flipper."""

from .beamline import BeamlineSpec, RunResult, ScanSpec, run, scan, time_resolved
from .errors import SimulationError
from .qstate import KetState, PathLabel, Port, SpinLabel

__all__ = [
    "BeamlineSpec",
    "KetState",
    "PathLabel",
    "Port",
    "RunResult",
    "ScanSpec",
    "SimulationError",
    "SpinLabel",
    "run",
    "scan",
    "time_resolved",
]
__version__ = "0.1.0"
