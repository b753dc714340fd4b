"""Two-mode Jaynes-Cummings model of an RF flipper with quantized drive fields.

The Hilbert space is a truncated photon-number window for each of the two
modes (``omega`` and ``omega/2``) times the neutron spin.  The Hamiltonian is

    H = |mu| B0 sz + hbar*omega*n_w + hbar*(omega/2)*n_h
        + mu_n * sum_j (B1_j / sqrt(N_j)) * (a_j^dag s~ + a_j s~^dag)

with ``mu_n = -|mu|``.  Spin up lies ``2|mu|B0`` above spin down, and ``s~`` is
the operator that lowers the spin, so ``a^dag s~`` is the resonant emission
term.  The kinetic energy of the neutron is a constant here and is dropped.

A classical field ``B1 cos(omega t + phi)`` corresponds to a coherent state
with ``arg(alpha) = -phi``; :meth:`CoherentSpec.from_rf_phase` applies that map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .analysis import phase_slope, wrap_phase
from .elements import DEFAULT_CONSTANTS, PhysicalConstants, resonant_b0
from .errors import BasisTooSmall, NumericalFailure
from .qstate import SpinLabel

TAIL_TOL = 1e-10
MIN_HALF_WIDTH = 8
UP, DOWN = 0, 1


def coherent_tail(n_mean, n_min, n_max):
    """Poisson weight of a coherent state outside ``[n_min, n_max]``."""
    if n_mean == 0:
        return 0.0 if n_min == 0 else 1.0
    below = poisson.cdf(n_min - 1, n_mean) if n_min > 0 else 0.0
    return float(below + poisson.sf(n_max, n_mean))


def coherent_window(alpha_magnitude):
    """``(n_min, n_max, center)`` for a coherent state of the given ``|alpha|``.

    Centered on ``ceil(|alpha|^2)`` with half-width at least ``max(8, 6|alpha|)``,
    widened until the truncated weight is below ``TAIL_TOL``.
    """
    n_mean = alpha_magnitude**2
    center = int(math.ceil(n_mean - 1e-12))
    hw = int(math.ceil(max(MIN_HALF_WIDTH, 6.0 * alpha_magnitude)))
    while coherent_tail(n_mean, max(0, center - hw), center + hw) >= TAIL_TOL:
        hw += 1
    return max(0, center - hw), center + hw, center


@dataclass(frozen=True)
class FockBasisSpec:
    """Photon-number windows for the two modes.

    A window collapsed to one level denotes an idle mode held in that number
    state.  ``center_*`` is the photon number used for the ``1/sqrt(N)`` coupling
    normalization; it defaults to the window midpoint.
    """

    n_min_omega: int
    n_max_omega: int
    n_min_half: int = 0
    n_max_half: int = 0
    center_omega: Optional[int] = None
    center_half: Optional[int] = None

    def __post_init__(self):
        if not (0 <= self.n_min_omega <= self.n_max_omega):
            raise BasisTooSmall("invalid photon window for mode omega")
        if not (0 <= self.n_min_half <= self.n_max_half):
            raise BasisTooSmall("invalid photon window for mode omega/2")
        if self.center_omega is None:
            object.__setattr__(
                self, "center_omega", (self.n_min_omega + self.n_max_omega) // 2
            )
        if self.center_half is None:
            object.__setattr__(self, "center_half", (self.n_min_half + self.n_max_half) // 2)

    @classmethod
    def for_coherent(cls, alpha_omega: float, alpha_half: Optional[float] = None, idle_half=0):
        """Windows sized for the given ``|alpha|``; ``alpha_half=None`` idles mode omega/2."""
        lo_w, hi_w, c_w = coherent_window(alpha_omega)
        if alpha_half is None:
            lo_h = hi_h = c_h = idle_half
        else:
            lo_h, hi_h, c_h = coherent_window(alpha_half)
        return cls(lo_w, hi_w, lo_h, hi_h, c_w, c_h)

    @property
    def numbers_omega(self) -> np.ndarray:
        return np.arange(self.n_min_omega, self.n_max_omega + 1)

    @property
    def numbers_half(self) -> np.ndarray:
        return np.arange(self.n_min_half, self.n_max_half + 1)

    @property
    def shape(self):
        return (self.numbers_omega.size, self.numbers_half.size, 2)

    @property
    def dim(self) -> int:
        a, b, c = self.shape
        return a * b * c


@dataclass(frozen=True)
class CoherentSpec:
    alpha_magnitude: float
    alpha_phase: float = 0.0

    def __post_init__(self):
        if self.alpha_magnitude < 0:
            raise ValueError("alpha_magnitude must be non-negative")

    @classmethod
    def from_rf_phase(cls, n_mean, rf_phase):
        return cls(math.sqrt(n_mean), -rf_phase)

    @property
    def alpha(self) -> complex:
        return self.alpha_magnitude * complex(math.cos(self.alpha_phase), math.sin(self.alpha_phase))


@dataclass(frozen=True)
class FockState:
    basis: FockBasisSpec
    amplitudes: np.ndarray  # shape basis.shape, axes (n_omega, n_half, spin)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def spin_weight(self, spin: int) -> float:
        return float(np.sum(np.abs(self.amplitudes[..., spin]) ** 2))

    def mean_photons(self):
        p = np.abs(self.amplitudes) ** 2
        n_w = float(np.sum(p.sum(axis=(1, 2)) * self.basis.numbers_omega))
        n_h = float(np.sum(p.sum(axis=(0, 2)) * self.basis.numbers_half))
        return n_w, n_h


@dataclass(frozen=True)
class JCParams:
    omega: float
    b0: float
    b1_omega: float
    b1_half: float
    interaction_time: float = 0.0
    consts: PhysicalConstants = field(default=DEFAULT_CONSTANTS, repr=False)

    def __post_init__(self):
        if self.omega < 0 or self.b0 < 0 or self.b1_omega < 0 or self.b1_half < 0:
            raise ValueError("frequencies and fields must be non-negative")


@dataclass(frozen=True)
class FlipStats:
    flip_probability: float
    imprinted_phase: float
    mean_photon_shift: tuple  # (mode omega, mode omega/2)


def rabi_angular_frequency(b1, consts=DEFAULT_CONSTANTS):
    return 2.0 * consts.mu_magnitude * b1 / consts.hbar


def pulse_area(b1, tau, consts=DEFAULT_CONSTANTS):
    return rabi_angular_frequency(b1, consts) * tau


def pulse_time(area, b1, consts=DEFAULT_CONSTANTS):
    return area / rabi_angular_frequency(b1, consts)


def _ladder(numbers):
    """Matrix of ``a^dag`` within the window: element [i+1, i] = sqrt(n_i + 1)."""
    m = np.zeros((numbers.size, numbers.size))
    for i in range(numbers.size - 1):
        m[i + 1, i] = math.sqrt(numbers[i] + 1)
    return m


def free_energies(params: JCParams, basis: FockBasisSpec) -> np.ndarray:
    """Diagonal of the uncoupled Hamiltonian in basis order, in joules."""
    c = params.consts
    hw = c.hbar * params.omega
    n_w = basis.numbers_omega[:, None, None]
    n_h = basis.numbers_half[None, :, None]
    sz = np.array([1.0, -1.0])[None, None, :]
    e = c.mu_magnitude * params.b0 * sz + hw * n_w + 0.5 * hw * n_h
    return np.broadcast_to(e, basis.shape).reshape(-1).astype(float)


def build_hamiltonian(params: JCParams, basis: FockBasisSpec) -> np.ndarray:
    """Dense Hermitian matrix of the two-mode model in joules."""
    c = params.consts
    mu_n = -c.mu_magnitude
    n_w, n_h = basis.numbers_omega.size, basis.numbers_half.size
    h = np.diag(free_energies(params, basis)).astype(complex)
    lower = np.array([[0.0, 0.0], [1.0, 0.0]])  # |down><up|
    for b1, center, ad, eye_w, eye_h in (
        (params.b1_omega, basis.center_omega, _ladder(basis.numbers_omega), None, np.eye(n_h)),
        (params.b1_half, basis.center_half, _ladder(basis.numbers_half), np.eye(n_w), None),
    ):
        if b1 == 0.0:
            continue
        g = mu_n * b1 / math.sqrt(max(center, 1))
        if eye_h is not None:
            emit = np.kron(np.kron(ad, eye_h), lower)
        else:
            emit = np.kron(np.kron(eye_w, ad), lower)
        h += g * (emit + emit.conj().T)
    return h


def prepare_initial(
    basis: FockBasisSpec, spec_omega: CoherentSpec, spec_half: CoherentSpec, spin: SpinLabel
) -> FockState:
    """Product of the two truncated coherent states with a definite spin."""
    modes = []
    for name, spec, numbers in (
        ("omega", spec_omega, basis.numbers_omega),
        ("omega/2", spec_half, basis.numbers_half),
    ):
        if numbers.size == 1:
            modes.append(np.ones(1, dtype=complex))
            continue
        n_mean = spec.alpha_magnitude**2
        tail = coherent_tail(n_mean, numbers[0], numbers[-1])
        if tail >= TAIL_TOL:
            raise BasisTooSmall(
                f"coherent weight {tail:.3g} outside photon window of mode {name}"
            )
        if spec.alpha_magnitude == 0:
            amp = (numbers == 0).astype(complex)
        else:
            log_mag = (
                -0.5 * n_mean
                + numbers * math.log(spec.alpha_magnitude)
                - 0.5 * gammaln(numbers + 1)
            )
            amp = np.exp(log_mag) * np.exp(1j * spec.alpha_phase * numbers)
        modes.append(amp)
    amps = np.zeros(basis.shape, dtype=complex)
    amps[..., UP if spin is SpinLabel.UP else DOWN] = np.outer(modes[0], modes[1])
    amps /= math.sqrt(np.sum(np.abs(amps) ** 2))
    return FockState(basis, amps)


def evolve(state: FockState, h: np.ndarray, t: float, consts=DEFAULT_CONSTANTS) -> FockState:
    """Apply ``exp(-i H t / hbar)`` by spectral decomposition."""
    if t == 0.0:
        return state
    w, v = np.linalg.eigh(h / consts.hbar)
    psi = v @ (np.exp(-1j * w * t) * (v.conj().T @ state.vector))
    n2 = float(np.vdot(psi, psi).real)
    if abs(n2 - 1.0) > 1e-8 * max(1.0, state.norm2()):
        raise NumericalFailure(f"norm drifted to {n2!r} during evolution")
    return FockState(state.basis, psi.reshape(state.basis.shape))


def to_rotating_frame(state: FockState, params: JCParams, t: float) -> FockState:
    """Remove the free evolution ``exp(-i H0 t / hbar)`` accumulated over ``t``."""
    e = free_energies(params, state.basis) / params.consts.hbar
    psi = np.exp(1j * e * t) * state.vector
    return FockState(state.basis, psi.reshape(state.basis.shape))


def expectation(state: FockState, h: np.ndarray) -> float:
    psi = state.vector
    return float(np.vdot(psi, h @ psi).real)


def spin_flip_stats(initial: FockState, final: FockState) -> FlipStats:
    """Flip probability, phase imprinted on the flipped spin, and photon exchange.

    The imprinted phase is ``arg <field_initial | field_final, flipped>``, the
    overlap of the flipped-spin field component with the initial field state.
    Only differences of this phase between runs are physically meaningful.
    """
    if initial.basis != final.basis:
        raise ValueError("states live on different bases")
    start = UP if initial.spin_weight(UP) >= initial.spin_weight(DOWN) else DOWN
    other = DOWN if start == UP else UP
    p_flip = final.spin_weight(other)
    overlap = np.vdot(initial.amplitudes[..., start], final.amplitudes[..., other])
    phase = wrap_phase(np.angle(overlap)) if abs(overlap) > 0 else 0.0
    n0 = initial.mean_photons()
    n1 = final.mean_photons()
    return FlipStats(p_flip, phase, (n1[0] - n0[0], n1[1] - n0[1]))


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tolerance: float
    passed: bool


def flip_run(n_mean, rf_phase, area, spin=SpinLabel.UP, omega=2 * math.pi * 58e3,
             b1=1e-3, consts=DEFAULT_CONSTANTS, basis=None):
    """Drive mode omega for the given pulse area; returns ``(initial, final-rotating, stats)``."""
    params = JCParams(omega, resonant_b0(omega, consts), b1, 0.0, consts=consts)
    basis = basis or FockBasisSpec.for_coherent(math.sqrt(n_mean))
    init = prepare_initial(
        basis, CoherentSpec.from_rf_phase(n_mean, rf_phase), CoherentSpec(0.0), spin
    )
    t = pulse_time(area, b1, consts)
    h = build_hamiltonian(params, basis)
    final = to_rotating_frame(evolve(init, h, t, consts), params, t)
    return init, final, spin_flip_stats(init, final)


def validate_correspondence(
    n_mean=100.0,
    area=math.pi,
    phase_shift=math.pi / 6,
    phase_grid=None,
    consts=DEFAULT_CONSTANTS,
    basis=None,
):
    """Quantized-field checks against the semiclassical pi flipper."""
    checks = []
    _, _, st = flip_run(n_mean, 0.0, area, consts=consts, basis=basis)
    semi = math.sin(0.5 * area) ** 2
    checks.append(Check("flip_probability", st.flip_probability, semi, 0.01,
                        st.flip_probability >= semi - 0.01))
    checks.append(Check("photon_shift_omega", st.mean_photon_shift[0], semi, 0.05,
                        abs(st.mean_photon_shift[0] - semi) <= 0.05))
    _, _, st2 = flip_run(n_mean, phase_shift, area, consts=consts, basis=basis)
    shift = wrap_phase(st2.imprinted_phase - st.imprinted_phase)
    tol = math.radians(1.2)
    checks.append(Check("imprinted_phase_shift", shift, phase_shift, tol,
                        abs(wrap_phase(shift - phase_shift)) <= tol))
    grid = np.linspace(0.0, math.pi / 2, 7) if phase_grid is None else np.asarray(phase_grid)
    phases = [
        flip_run(n_mean, p, area, consts=consts, basis=basis)[2].imprinted_phase for p in grid
    ]
    slope = phase_slope(grid, phases).slope
    checks.append(Check("phase_transfer_slope", slope, 1.0, 0.02, abs(slope - 1.0) <= 0.02))
    vac = FockBasisSpec(0, MIN_HALF_WIDTH)
    _, _, st0 = flip_run(0.0, 0.0, area, spin=SpinLabel.DOWN, consts=consts, basis=vac)
    checks.append(Check("vacuum_absorption", st0.flip_probability, 0.0, 1e-12,
                        st0.flip_probability <= 1e-12))
    return checks
