"""Relative-phase measurements built from beamline scans.

A relative phase is the fitted fringe phase with the in-loop flipper on, minus
the phase of a reference scan with that flipper switched off.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import beamline as bl
from .analysis import FringeScan, SlopeResult, fit_fringe, phase_slope, relative_phase
from .qstate import SpinLabel

# slope of the relative phase vs each RF phase, per initial spin
EXPECTED_SLOPES = {
    (SpinLabel.UP, "phi_omega"): 1.0,
    (SpinLabel.DOWN, "phi_omega"): -1.0,
    (SpinLabel.UP, "phi_half"): -2.0,
    (SpinLabel.DOWN, "phi_half"): 2.0,
}


@dataclass
class Noise:
    """Poisson counting noise; ``counts`` is the expected count at unit intensity."""

    counts: float
    rng: np.random.Generator

    @classmethod
    def seeded(cls, counts, seed):
        return cls(float(counts), np.random.default_rng(seed))

    def sample(self, intensity):
        lam = np.clip(np.asarray(intensity) * self.counts, 0.0, None)
        return self.rng.poisson(lam) / self.counts


def chi_grid(points=16):
    return np.linspace(0.0, 2.0 * math.pi, points, endpoint=False)


def compensated(spec: bl.BeamlineSpec) -> bl.BeamlineSpec:
    """Set the accelerator coil to cancel the zero-field phase."""
    return dataclasses.replace(spec, accelerator_rotation=spec.zero_field_phase)


def chi_scan(spec, chi_values, noise: Optional[Noise] = None) -> FringeScan:
    res = bl.scan(bl.ScanSpec("chi", tuple(chi_values), spec))
    y = res.o_intensity if noise is None else noise.sample(res.o_intensity)
    return FringeScan(res.values, y)


def delta_phi(spec, chi_values, noise: Optional[Noise] = None) -> float:
    on = chi_scan(spec, chi_values, noise)
    off = chi_scan(dataclasses.replace(spec, flipper1_on=False), chi_values, noise)
    return relative_phase(on, off)


def slope_experiment(base, parameter, settings, chi_values, noise=None):
    """Relative phase on a grid of one RF phase; returns ``(phases, SlopeResult)``."""
    phases = np.array(
        [delta_phi(bl.with_parameter(base, parameter, s), chi_values, noise) for s in settings]
    )
    return phases, phase_slope(settings, phases)


@dataclass(frozen=True)
class SlopeRecord:
    spin: SpinLabel
    parameter: str
    settings: np.ndarray
    phases: np.ndarray
    fit: SlopeResult

    @property
    def expected(self) -> float:
        return EXPECTED_SLOPES[(self.spin, self.parameter)]


def phase_slopes(base, settings, chi_values=None, noise=None):
    """All four relative-phase slopes: both initial spins, both RF phases."""
    chi_values = chi_grid() if chi_values is None else chi_values
    base = compensated(base)
    settings = np.asarray(settings, dtype=float)
    out = []
    for spin in (SpinLabel.UP, SpinLabel.DOWN):
        spec = dataclasses.replace(base, initial_spin=spin)
        for parameter in ("phi_omega", "phi_half"):
            phases, fit = slope_experiment(spec, parameter, settings, chi_values, noise)
            out.append(SlopeRecord(spin, parameter, settings, phases, fit))
    return out


def fitted_visibility(spec, chi_values=None) -> float:
    chi_values = chi_grid() if chi_values is None else chi_values
    return fit_fringe(chi_scan(spec, chi_values)).visibility
