"""Fringe fitting, relative phases, phase slopes and the geometric phase.

All phases returned here are wrapped to ``(-pi, pi]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateFit, NegativeOffset

VISIBILITY_FLOOR = 1e-12


def wrap_phase(x):
    """Wrap to ``(-pi, pi]``; works on scalars and arrays."""
    w = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2.0 * np.pi)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class FringeFit:
    offset: float
    visibility: float
    phase: float
    residual_rms: float
    phase_identifiable: bool = True


@dataclass(frozen=True)
class FringeScan:
    x: np.ndarray
    intensity: np.ndarray
    fitted: Optional[FringeFit] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.intensity, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and intensity must be 1-d arrays of equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "intensity", y)

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.intensity.tolist()))


@dataclass(frozen=True)
class SlopeResult:
    slope: float
    intercept: float
    stderr: float


def fit_fringe(scan: FringeScan) -> FringeFit:
    """Least-squares fit of ``A (1 + nu cos(x + Phi))``.

    Solved in closed form through ``I = A + B cos x + C sin x``, which gives
    ``nu = hypot(B, C) / A`` and ``Phi = atan2(-C, B)``.
    """
    x, y = scan.x, scan.intensity
    if x.size < 4:
        raise DegenerateFit(f"need at least 4 points, got {x.size}")
    design = np.column_stack([np.ones_like(x), np.cos(x), np.sin(x)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise DegenerateFit("fringe design matrix is rank deficient")
    a, b, c = coef
    if a <= 0:
        raise NegativeOffset(f"fitted offset {a!r} is not positive")
    resid = y - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    amp = math.hypot(b, c)
    nu = amp / a
    if nu <= VISIBILITY_FLOOR:
        return FringeFit(float(a), 0.0, 0.0, rms, phase_identifiable=False)
    return FringeFit(float(a), float(nu), wrap_phase(math.atan2(-c, b)), rms)


def fitted(scan: FringeScan) -> FringeScan:
    return replace(scan, fitted=fit_fringe(scan))


def _fit_of(scan: FringeScan) -> FringeFit:
    return scan.fitted if scan.fitted is not None else fit_fringe(scan)


def relative_phase(scan_on: FringeScan, scan_off: FringeScan) -> float:
    on, off = _fit_of(scan_on), _fit_of(scan_off)
    if not (on.phase_identifiable and off.phase_identifiable):
        raise DegenerateFit("fringe phase is unidentifiable (zero visibility)")
    return wrap_phase(on.phase - off.phase)


def phase_slope(settings: Sequence[float], phases: Sequence[float]) -> SlopeResult:
    """OLS line through phase vs setting after unwrapping along sorted settings."""
    s = np.asarray(settings, dtype=float)
    p = np.asarray(phases, dtype=float)
    if s.shape != p.shape or s.ndim != 1:
        raise ValueError("settings and phases must be equal-length 1-d sequences")
    if s.size < 3:
        raise DegenerateFit(f"need at least 3 settings, got {s.size}")
    if np.ptp(s) == 0:
        raise DegenerateFit("settings are constant")
    order = np.argsort(s, kind="stable")
    s = s[order]
    p = np.unwrap(wrap_phase(p[order]))
    n = s.size
    sm, pm = s.mean(), p.mean()
    sxx = np.sum((s - sm) ** 2)
    slope = np.sum((s - sm) * (p - pm)) / sxx
    intercept = pm - slope * sm
    resid = p - (intercept + slope * s)
    dof = n - 2
    sigma2 = np.sum(resid**2) / dof if dof > 0 else 0.0
    stderr = math.sqrt(sigma2 / sxx)
    return SlopeResult(float(slope), float(intercept), float(stderr))


def geometric_phase(phi_omega: float, phi_half: float) -> float:
    """Half the solid angle of the lune traced by the two semi-great circles."""
    return wrap_phase(phi_omega - phi_half)


def _unit(theta, phi):
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def _triangle_solid_angle(a, b, c):
    # Van Oosterom-Strackee, signed by orientation
    num = np.dot(a, np.cross(b, c))
    den = 1.0 + np.dot(a, b) + np.dot(b, c) + np.dot(c, a)
    return 2.0 * math.atan2(num, den)


def solid_angle_semi_great_circles(phi1: float, phi2: float, segments: int = 64) -> float:
    """Solid angle of the lune bounded by meridians at azimuths ``phi2`` and ``phi1``.

    The closed spin path runs pole to pole along ``phi1`` and back along
    ``phi2``; its enclosed area is summed as a fan of geodesic triangles around
    a point on the equator inside the lune.  Positive when ``phi1`` leads.
    """
    opening = wrap_phase(phi1 - phi2)
    if opening == 0.0:
        return 0.0
    start = float(phi2)
    thetas = np.linspace(0.0, np.pi, segments + 1)
    down = [_unit(t, start + opening) for t in thetas]
    up = [_unit(t, start) for t in thetas[::-1]]
    loop = down + up[1:]
    apex = _unit(np.pi / 2, start + opening / 2)
    total = 0.0
    for p, q in zip(loop[:-1], loop[1:]):
        total += _triangle_solid_angle(apex, q, p)
    return total
