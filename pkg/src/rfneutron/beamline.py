"""The two-flipper interferometer pipeline.

Reported beam intensities are in units of the mean share of one output port of
a balanced interferometer (half the incident flux), so an ideal χ fringe behind
the spin analyzer reads ``(1 + nu*cos(chi + Phi)) / 2``.  Raw transmission
probabilities, which add up to at most one, are kept alongside.

A fringe visibility below one is modelled as a mixture: the coherent pipeline
weighted by ``nu`` plus the two single-path contributions weighted by ``1 - nu``.
Only the interference term is thereby scaled.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import elements as el
from .analysis import FringeScan
from .errors import BadConfig
from .qstate import (
    KetState,
    PathLabel,
    PolarizationVector,
    SpinLabel,
    fold_time_phase,
    intensity,
    polarization,
)

PORT_SHARE = 0.5
DEFAULT_OMEGA = 2.0 * math.pi * 58e3
DEFAULT_WAVELENGTH = 1.91e-10
DEFAULT_COIL_LENGTH = 0.02
SCAN_PARAMETERS = ("chi", "phi_omega", "phi_half")


def default_flippers(
    omega=DEFAULT_OMEGA,
    phi_omega=0.0,
    phi_half=0.0,
    coil_length=DEFAULT_COIL_LENGTH,
    ctx=None,
    consts=el.DEFAULT_CONSTANTS,
):
    """Resonant pi flippers at ``omega`` (inside path II) and ``omega/2`` (behind)."""
    ctx = ctx or el.BeamContext(DEFAULT_WAVELENGTH, consts=consts)
    f1 = el.tuned_flipper(omega, phi_omega, coil_length, ctx, PathLabel.II, consts)
    f2 = el.tuned_flipper(0.5 * omega, phi_half, coil_length, ctx, None, consts)
    return f1, f2


def _default_f1():
    return default_flippers()[0]


def _default_f2():
    return default_flippers()[1]


@dataclass(frozen=True)
class BeamlineSpec:
    initial_spin: SpinLabel = SpinLabel.UP
    flipper1: el.FlipperConfig = field(default_factory=_default_f1)
    flipper1_on: bool = True
    flipper2: el.FlipperConfig = field(default_factory=_default_f2)
    flipper2_on: bool = True
    chi: float = 0.0
    accelerator_rotation: float = 0.0
    zero_field_phase: float = 0.0
    visibility: float = 1.0
    analyzer_keep: SpinLabel = SpinLabel.UP
    turner_on: bool = True
    context: el.BeamContext = field(
        default_factory=lambda: el.BeamContext(DEFAULT_WAVELENGTH)
    )
    consts: el.PhysicalConstants = el.DEFAULT_CONSTANTS

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise BadConfig(f"visibility {self.visibility!r} outside [0, 1]")
        if self.flipper1.applies_to_path is not PathLabel.II:
            raise BadConfig("flipper1 must act on path II", element="flipper1")
        if self.flipper2.applies_to_path is not None:
            raise BadConfig("flipper2 acts on the recombined beam", element="flipper2")
        if self.flipper1_on and self.flipper2_on:
            ratio = self.flipper2.omega / (0.5 * self.flipper1.omega)
            if abs(ratio - 1.0) > 1e-9:
                raise BadConfig(
                    "flipper2 must run at half the frequency of flipper1",
                    element="flipper2",
                )

    @property
    def omega_ref(self) -> float:
        return self.flipper1.omega

    @property
    def phi_omega(self) -> float:
        return self.flipper1.phi

    @property
    def phi_half(self) -> float:
        return self.flipper2.phi


@dataclass(frozen=True)
class RunResult:
    o_intensity: float
    h_intensity: float
    o_transmission: float
    h_transmission: float
    stationary: bool
    o_polarization: Optional[PolarizationVector]
    time_series: Optional[tuple] = None


@dataclass(frozen=True)
class ScanSpec:
    parameter: str
    values: tuple
    base: BeamlineSpec

    def __post_init__(self):
        if self.parameter not in SCAN_PARAMETERS:
            raise BadConfig(f"unknown scan parameter {self.parameter!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals or not all(math.isfinite(v) for v in vals):
            raise BadConfig("scan values must be non-empty and finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ScanResult:
    parameter: str
    values: np.ndarray
    o_intensity: np.ndarray
    h_intensity: np.ndarray

    def fringe(self, port="O") -> FringeScan:
        y = self.o_intensity if port == "O" else self.h_intensity
        return FringeScan(self.values, y)


def with_parameter(spec: BeamlineSpec, name: str, value: float) -> BeamlineSpec:
    if name == "chi":
        return dataclasses.replace(spec, chi=value)
    if name == "phi_omega":
        return dataclasses.replace(spec, flipper1=dataclasses.replace(spec.flipper1, phi=value))
    if name == "phi_half":
        return dataclasses.replace(spec, flipper2=dataclasses.replace(spec.flipper2, phi=value))
    raise BadConfig(f"unknown scan parameter {name!r}")


def invert_initial_polarization(spec: BeamlineSpec) -> BeamlineSpec:
    return dataclasses.replace(spec, initial_spin=spec.initial_spin.flipped())


def _entrance_state(spec: BeamlineSpec) -> KetState:
    # A down spin absorbs in flipper1, so it enters one flip above the ladder floor.
    k0 = 0
    if spec.initial_spin is SpinLabel.DOWN:
        k0 = el.ladder_step(spec.flipper1.omega, spec.omega_ref)
    return KetState.basis(PathLabel.I, k0, spec.initial_spin, spec.omega_ref)


def _restrict(state: KetState, path: PathLabel) -> KetState:
    return KetState(
        {k: a for k, a in state.amplitudes.items() if k[0] is path}, state.omega_ref
    )


def _interferometer(spec: BeamlineSpec, path: Optional[PathLabel] = None):
    """Regions 1-4.  Returns the ``(O, H)`` port states before any free propagation."""
    state = el.beam_split(_entrance_state(spec))
    state = el.apply_phase_shifter(state, spec.chi, PathLabel.II)
    if path is not None:
        state = _restrict(state, path)
    if spec.flipper1_on:
        state = el.rf_flip_resonant(
            state, spec.flipper1, spec.context, spec.consts, name="flipper1"
        )
    return el.recombine(state)


def _analysis_arm(spec: BeamlineSpec, o_state: KetState):
    """Regions 5-6.  Returns ``(state before turner, state after analyzer)``."""
    state = fold_time_phase(o_state, spec.zero_field_phase / spec.omega_ref, keep_labels=True)
    if spec.flipper2_on:
        state = el.rf_flip_resonant(
            state, spec.flipper2, spec.context, spec.consts, name="flipper2"
        )
    state = el.accelerator_phase(state, spec.accelerator_rotation)
    pre = state
    if spec.turner_on:
        state = el.pi_half_turner(state)
    return pre, el.spin_analyze(state, spec.analyzer_keep)


def _components(spec: BeamlineSpec):
    """Coherent pipeline plus single-path pipelines as ``(weight, path)`` pairs."""
    nu = spec.visibility
    parts = [(nu, None)] if nu > 0 else []
    if nu < 1:
        parts += [(1.0 - nu, PathLabel.I), (1.0 - nu, PathLabel.II)]
    return parts


def _mix_polarization(terms):
    total = sum(w * i for w, i, _ in terms)
    if total <= 0:
        return None
    vec = sum(w * i * p.as_array() for w, i, p in terms if p is not None) / total
    return PolarizationVector(*map(float, vec))


def run(spec: BeamlineSpec) -> RunResult:
    o_t = h_t = 0.0
    stationary = True
    pol_terms = []
    for weight, path in _components(spec):
        o_state, h_state = _interferometer(spec, path)
        pre, post = _analysis_arm(spec, o_state)
        o_t += weight * intensity(post)
        h_t += weight * intensity(h_state)
        n_pre = intensity(pre)
        if len({k for (_, k, _) in pre.amplitudes}) > 1:
            stationary = False
        if n_pre > 0:
            pol_terms.append((weight, n_pre, polarization(pre)))
    pol = _mix_polarization(pol_terms) if stationary else None
    return RunResult(
        o_intensity=o_t / PORT_SHARE,
        h_intensity=h_t / PORT_SHARE,
        o_transmission=o_t,
        h_transmission=h_t,
        stationary=stationary,
        o_polarization=pol,
    )


def region4_state(spec: BeamlineSpec, path=None) -> KetState:
    return _interferometer(spec, path)[0]


def time_resolved(spec: BeamlineSpec, times: Sequence[float]):
    """O-beam polarization between the recombiner and the second flipper."""
    if spec.flipper2_on:
        raise BadConfig("time-resolved detection needs flipper2 off", element="flipper2")
    if not spec.flipper1_on:
        raise BadConfig("time-resolved detection needs flipper1 on", element="flipper1")
    states = [(w, region4_state(spec, path)) for w, path in _components(spec)]
    out = []
    for t in times:
        terms = []
        for w, s in states:
            folded = fold_time_phase(s, t)
            n = intensity(folded)
            if n > 0:
                terms.append((w, n, polarization(folded)))
        out.append((float(t), _mix_polarization(terms)))
    return out


def detected_o_intensity(spec: BeamlineSpec, times: Sequence[float]) -> np.ndarray:
    """Post-analyzer O intensity resolved in detection time (port-share units)."""
    posts = [(w, _analysis_arm(spec, _interferometer(spec, path)[0])[1])
             for w, path in _components(spec)]
    return np.array(
        [sum(w * intensity(fold_time_phase(s, t)) for w, s in posts) / PORT_SHARE for t in times]
    )


def scan(spec: ScanSpec) -> ScanResult:
    o, h = [], []
    for v in spec.values:
        r = run(with_parameter(spec.base, spec.parameter, v))
        o.append(r.o_intensity)
        h.append(r.h_intensity)
    return ScanResult(spec.parameter, np.array(spec.values), np.array(o), np.array(h))
