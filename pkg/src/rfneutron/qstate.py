"""Complex-amplitude algebra on the path x energy x spin basis.

A :class:`KetState` is a sparse expansion over basis kets ``|path, k, spin>``
where the energy label ``k`` counts half quanta below the incident energy,
``E = E0 - k * hbar * omega_ref / 2``.  States are immutable; every operation
returns a new state.

Polarization convention: the transverse azimuth of a spinor ``(a_up, a_down)``
is ``arg(a_up) - arg(a_down)``, i.e. ``Py = 2 Im(a_up conj(a_down))``.  With
this choice the stationary spinor behind the second flipper has polarization
``(cos D, sin D, 0)`` where ``D`` is the phase carried by the up component
relative to the down component.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import FrequencyMismatch, ZeroNorm

PRUNE_THRESHOLD = 1e-15
ZERO_NORM_THRESHOLD = 1e-30


class SpinLabel(enum.Enum):
    UP = "up"
    DOWN = "down"

    def flipped(self) -> "SpinLabel":
        return SpinLabel.DOWN if self is SpinLabel.UP else SpinLabel.UP


class PathLabel(enum.Enum):
    """Interferometer paths between the first and last crystal plate."""

    I = "I"  # noqa: E741
    II = "II"


class Port(enum.Enum):
    """Output ports behind the recombining plate (forward O, diffracted H)."""

    O = "O"  # noqa: E741
    H = "H"


Location = Union[PathLabel, Port]
Key = tuple  # (Location, int, SpinLabel)


@dataclass(frozen=True)
class Branch:
    path: Location
    energy: int
    spin: SpinLabel
    amplitude: complex


@dataclass(frozen=True)
class PolarizationVector:
    px: float
    py: float
    pz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz])

    def norm(self) -> float:
        return math.sqrt(self.px**2 + self.py**2 + self.pz**2)


def _check_key(key):
    path, k, spin = key
    if not isinstance(path, (PathLabel, Port)):
        raise TypeError(f"bad path label {path!r}")
    if not isinstance(spin, SpinLabel):
        raise TypeError(f"bad spin label {spin!r}")
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError(f"energy label must be a non-negative integer, got {k!r}")


class KetState:
    """Immutable sparse ket over ``(path, k, spin)`` triples.

    Parameters
    ----------
    amplitudes : mapping
        ``{(path, k, spin): complex}``.  Keys are unique by construction.
    omega_ref : float
        Angular frequency (rad/s) whose half quantum defines the energy ladder.
    """

    __slots__ = ("_amps", "_omega_ref")

    def __init__(self, amplitudes: Mapping[Key, complex], omega_ref: float):
        amps = {}
        for key, amp in amplitudes.items():
            _check_key(key)
            amp = complex(amp)
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ValueError(f"non-finite amplitude on {key}")
            amps[(key[0], int(key[1]), key[2])] = amp
        if not omega_ref > 0:
            raise ValueError("omega_ref must be positive")
        self._amps = MappingProxyType(amps)
        self._omega_ref = float(omega_ref)

    @classmethod
    def from_branches(cls, branches: Iterable[Branch], omega_ref: float) -> "KetState":
        amps = {}
        for b in branches:
            key = (b.path, b.energy, b.spin)
            if key in amps:
                raise ValueError(f"duplicate basis triple {key}")
            amps[key] = b.amplitude
        return cls(amps, omega_ref)

    @classmethod
    def basis(cls, path, k, spin, omega_ref, amplitude=1.0) -> "KetState":
        return cls({(path, k, spin): amplitude}, omega_ref)

    @property
    def amplitudes(self) -> Mapping[Key, complex]:
        return self._amps

    @property
    def omega_ref(self) -> float:
        return self._omega_ref

    @property
    def branches(self) -> tuple:
        return tuple(Branch(p, k, s, a) for (p, k, s), a in self._amps.items())

    def amplitude(self, path, k, spin) -> complex:
        return self._amps.get((path, k, spin), 0j)

    def norm2(self) -> float:
        return sum(abs(a) ** 2 for a in self._amps.values())

    def __len__(self):
        return len(self._amps)

    def __repr__(self):
        inner = ", ".join(
            f"({p.value},{k},{s.value}): {a:.6g}" for (p, k, s), a in self._amps.items()
        )
        return f"KetState({{{inner}}}, omega_ref={self._omega_ref:.6g})"


def merged(items: Iterable, omega_ref: float) -> KetState:
    """Build a state from ``(key, amplitude)`` pairs, summing duplicates and pruning."""
    acc = {}
    for key, amp in items:
        acc[key] = acc.get(key, 0j) + amp
    return KetState({k: a for k, a in acc.items() if abs(a) >= PRUNE_THRESHOLD}, omega_ref)


def normalize(state: KetState) -> KetState:
    n2 = state.norm2()
    if n2 <= ZERO_NORM_THRESHOLD:
        raise ZeroNorm("cannot normalize a state with vanishing norm")
    scale = 1.0 / math.sqrt(n2)
    return KetState({k: a * scale for k, a in state.amplitudes.items()}, state.omega_ref)


def superpose(a: KetState, b: KetState, ca: complex, cb: complex) -> KetState:
    """Return ``ca*a + cb*b`` with coinciding basis triples merged."""
    if not math.isclose(a.omega_ref, b.omega_ref, rel_tol=1e-12, abs_tol=0.0):
        raise FrequencyMismatch(
            f"omega_ref differs: {a.omega_ref!r} vs {b.omega_ref!r}"
        )
    items = [(k, ca * v) for k, v in a.amplitudes.items()]
    items += [(k, cb * v) for k, v in b.amplitudes.items()]
    return merged(items, a.omega_ref)


def fold_time_phase(state: KetState, t: float, keep_labels: bool = False) -> KetState:
    """Attach the detection-time phase ``exp(+i k (omega_ref/2) t)`` to each branch.

    By default the energy labels are then collapsed to ``k = 0`` so that branches
    differing only in energy interfere.  With ``keep_labels=True`` the phases are
    applied and the ladder bookkeeping is retained, which is how free propagation
    between flippers is modelled.
    """
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    half = 0.5 * state.omega_ref
    items = []
    for (path, k, spin), amp in state.amplitudes.items():
        phased = amp * cmath.exp(1j * k * half * t)
        items.append(((path, k if keep_labels else 0, spin), phased))
    return merged(items, state.omega_ref)


def _spin_blocks(state: KetState):
    blocks = {}
    for (path, k, spin), amp in state.amplitudes.items():
        up, dn = blocks.get((path, k), (0j, 0j))
        if spin is SpinLabel.UP:
            up += amp
        else:
            dn += amp
        blocks[(path, k)] = (up, dn)
    return blocks


def polarization(state: KetState) -> PolarizationVector:
    """Spin polarization, incoherent over (path, energy) blocks, coherent in spin."""
    n2 = state.norm2()
    if n2 <= ZERO_NORM_THRESHOLD:
        raise ZeroNorm("polarization of an empty state")
    px = py = pz = 0.0
    for up, dn in _spin_blocks(state).values():
        cross = up * dn.conjugate()
        px += 2.0 * cross.real
        py += 2.0 * cross.imag
        pz += abs(up) ** 2 - abs(dn) ** 2
    return PolarizationVector(px / n2, py / n2, pz / n2)


def intensity(state: KetState) -> float:
    return state.norm2()
