"""Semiclassical beamline elements acting on :class:`~rfneutron.qstate.KetState`.

Resonant RF flippers are modelled as ideal pi flips.  Flipping up to down
emits one photon of the drive, lowering the total energy by ``hbar*omega`` and
multiplying the amplitude by ``exp(+i phi)``; the reverse flip absorbs a photon
and picks up ``exp(-i phi)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import scipy.constants as sc

from .errors import (
    BadInput,
    FrequencyMismatch,
    NegativeLadder,
    NotPiPulse,
    NotResonant,
)
from .qstate import KetState, PathLabel, Port, SpinLabel, merged

RESONANCE_TOL = 1e-6
PI_PULSE_TOL = 1e-9
SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class PhysicalConstants:
    mu_magnitude: float = abs(sc.physical_constants["neutron mag. mom."][0])
    hbar: float = sc.hbar
    neutron_mass: float = sc.physical_constants["neutron mass"][0]
    planck: float = sc.h

    def __post_init__(self):
        for name in ("mu_magnitude", "hbar", "neutron_mass", "planck"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class FlipperConfig:
    """One RF flip coil.

    ``applies_to_path`` restricts the flipper to one interferometer path; ``None``
    means it sits behind the interferometer and acts on every branch.
    """

    omega: float
    phi: float
    b0: float
    b1: float
    coil_length: float
    applies_to_path: Optional[PathLabel] = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.b0 < 0 or self.b1 < 0:
            raise ValueError("field amplitudes must be non-negative")
        if not self.coil_length > 0:
            raise ValueError("coil_length must be positive")


@dataclass(frozen=True)
class BeamContext:
    wavelength: float
    flight_time_between_flippers: float = 0.0
    consts: PhysicalConstants = field(default=DEFAULT_CONSTANTS, repr=False)

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def velocity(self) -> float:
        """de Broglie velocity ``h / (m lambda)``."""
        return self.consts.planck / (self.consts.neutron_mass * self.wavelength)

    @classmethod
    def from_separation(cls, wavelength, separation, consts=DEFAULT_CONSTANTS):
        ctx = cls(wavelength, 0.0, consts)
        return cls(wavelength, separation / ctx.velocity, consts)


@dataclass(frozen=True)
class PhaseShifterConfig:
    thickness: float
    scattering_length: float
    particle_density: float
    wavelength: float

    def __post_init__(self):
        for name in ("thickness", "scattering_length", "particle_density", "wavelength"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def phase_shift_chi(config: PhaseShifterConfig) -> float:
    return (
        config.particle_density
        * config.scattering_length
        * config.wavelength
        * config.thickness
    )


def resonance_frequency(b0: float, consts: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Larmor angular frequency ``2 |mu| B0 / hbar`` of the guide field."""
    if b0 < 0:
        raise ValueError("b0 must be non-negative")
    return 2.0 * consts.mu_magnitude * b0 / consts.hbar


def resonant_b0(omega, consts=DEFAULT_CONSTANTS):
    return consts.hbar * omega / (2.0 * consts.mu_magnitude)


def pi_pulse_b1(transit_time, consts=DEFAULT_CONSTANTS):
    return math.pi * consts.hbar / (2.0 * transit_time * consts.mu_magnitude)


def tuned_flipper(
    omega,
    phi,
    coil_length,
    ctx: BeamContext,
    applies_to_path=None,
    consts=DEFAULT_CONSTANTS,
) -> FlipperConfig:
    """Flipper with ``b0`` on resonance and ``b1`` set for a pi flip at ``ctx.velocity``."""
    tau = coil_length / ctx.velocity
    return FlipperConfig(
        omega=omega,
        phi=phi,
        b0=resonant_b0(omega, consts),
        b1=pi_pulse_b1(tau, consts),
        coil_length=coil_length,
        applies_to_path=applies_to_path,
    )


def rabi_flip_probability(
    cfg: FlipperConfig, ctx: BeamContext, consts: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Spin-flip probability after one transit of the coil.

    Uses the Rabi formula with on-axis frequency ``omega1 = 2|mu|B1/hbar`` and
    detuning ``omega - 2|mu|B0/hbar``.
    """
    tau = cfg.coil_length / ctx.velocity
    omega1 = 2.0 * consts.mu_magnitude * cfg.b1 / consts.hbar
    detuning = cfg.omega - resonance_frequency(cfg.b0, consts)
    rabi = math.hypot(detuning, omega1)
    if rabi == 0.0:
        return 0.0
    p = (omega1 / rabi) ** 2 * math.sin(0.5 * rabi * tau) ** 2
    return min(1.0, max(0.0, p))


def ladder_step(cfg_omega: float, omega_ref: float) -> int:
    """Energy shift of a flip in half quanta of ``omega_ref``."""
    ratio = cfg_omega / (0.5 * omega_ref)
    q = round(ratio)
    if q < 1 or abs(ratio - q) > 1e-9 * max(1.0, abs(ratio)):
        raise FrequencyMismatch(
            f"flipper frequency {cfg_omega!r} is not a multiple of omega_ref/2"
        )
    return q


def check_flipper(cfg, ctx, consts=DEFAULT_CONSTANTS, name="flipper"):
    expected_b0 = resonant_b0(cfg.omega, consts)
    if cfg.b0 <= 0 or abs(cfg.b0 - expected_b0) / cfg.b0 > RESONANCE_TOL:
        raise NotResonant(
            f"b0={cfg.b0!r} T detuned from resonance value {expected_b0!r} T", element=name
        )
    p = rabi_flip_probability(cfg, ctx, consts)
    if abs(1.0 - p) > PI_PULSE_TOL:
        raise NotPiPulse(f"flip probability {p!r} is not a pi flip", element=name)


def beam_split(state: KetState) -> KetState:
    items = []
    for (path, k, spin), amp in state.amplitudes.items():
        if path is not PathLabel.I:
            raise BadInput(f"beam splitter expects a single path-I beam, got {path.value}")
        items.append(((PathLabel.I, k, spin), amp * SQRT_HALF))
        items.append(((PathLabel.II, k, spin), amp * SQRT_HALF))
    return merged(items, state.omega_ref)


def apply_phase_shifter(state: KetState, chi: float, on_path=PathLabel.II) -> KetState:
    factor = cmath.exp(1j * chi)
    items = [
        (key, amp * factor if key[0] is on_path else amp)
        for key, amp in state.amplitudes.items()
    ]
    return merged(items, state.omega_ref)


def rf_flip_resonant(
    state: KetState,
    cfg: FlipperConfig,
    ctx: BeamContext,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
    name: str = "flipper",
) -> KetState:
    check_flipper(cfg, ctx, consts, name)
    q = ladder_step(cfg.omega, state.omega_ref)
    up_phase = cmath.exp(1j * cfg.phi)
    down_phase = up_phase.conjugate()
    items = []
    for (path, k, spin), amp in state.amplitudes.items():
        if cfg.applies_to_path is not None and path is not cfg.applies_to_path:
            items.append(((path, k, spin), amp))
        elif spin is SpinLabel.UP:
            items.append(((path, k + q, SpinLabel.DOWN), amp * up_phase))
        else:
            if k - q < 0:
                raise NegativeLadder(
                    f"absorbing flip would give energy label {k - q}", element=name
                )
            items.append(((path, k - q, SpinLabel.UP), amp * down_phase))
    return merged(items, state.omega_ref)


def recombine(state: KetState):
    """Last interferometer plate; returns ``(forward O state, diffracted H state)``."""
    pairs = {}
    for (path, k, spin), amp in state.amplitudes.items():
        a_i, a_ii = pairs.get((k, spin), (0j, 0j))
        if path is PathLabel.I:
            a_i += amp
        elif path is PathLabel.II:
            a_ii += amp
        else:
            raise BadInput(f"recombiner expects interferometer paths, got {path.value}")
        pairs[(k, spin)] = (a_i, a_ii)
    o_items = [((Port.O, k, s), (a + b) * SQRT_HALF) for (k, s), (a, b) in pairs.items()]
    h_items = [((Port.H, k, s), (a - b) * SQRT_HALF) for (k, s), (a, b) in pairs.items()]
    return merged(o_items, state.omega_ref), merged(h_items, state.omega_ref)


def accelerator_phase(state: KetState, z_rotation: float) -> KetState:
    """Larmor rotation about z: up gets ``exp(-i a/2)``, down ``exp(+i a/2)``."""
    up = cmath.exp(-0.5j * z_rotation)
    down = up.conjugate()
    items = [
        (key, amp * (up if key[2] is SpinLabel.UP else down))
        for key, amp in state.amplitudes.items()
    ]
    return merged(items, state.omega_ref)


def pi_half_turner(state: KetState) -> KetState:
    """Rotate the spin by pi/2 about y so that +x polarization ends up along +z."""
    blocks = {}
    for (path, k, spin), amp in state.amplitudes.items():
        up, dn = blocks.get((path, k), (0j, 0j))
        if spin is SpinLabel.UP:
            up += amp
        else:
            dn += amp
        blocks[(path, k)] = (up, dn)
    items = []
    for (path, k), (up, dn) in blocks.items():
        items.append(((path, k, SpinLabel.UP), (up + dn) * SQRT_HALF))
        items.append(((path, k, SpinLabel.DOWN), (dn - up) * SQRT_HALF))
    return merged(items, state.omega_ref)


def spin_analyze(state: KetState, keep: SpinLabel) -> KetState:
    return merged(
        ((key, amp) for key, amp in state.amplitudes.items() if key[2] is keep),
        state.omega_ref,
    )
