"""Far-field diffraction of matter waves by a transmission grating.

Closed-form intensities for an N-slit grating illuminated by a
perpendicularly incident plane matter wave, plus the per-order intensity
model with effective slit width, contrast loss and Gaussian order damping
used for fitting measured patterns.

All lengths are SI meters, angles are radians measured from the incident
beam direction. Intensity functions accept scalar or array angles/orders
and are pure, so they are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HE4_MASS, PLANCK_CONSTANT

SINGULAR_LIMIT_WINDOW = 1e-8
"""Denominator arguments closer than this to a zero are evaluated by series."""

SINH_ARG_LIMIT = 700.0
"""Largest sinh argument accepted before reporting a range error (float64
overflows just above 710)."""


@dataclass(frozen=True)
class Grating:
    """Transmission grating geometry: `num_slits` slits of width
    `slit_width` repeating with period `period` (meters)."""

    period: float
    slit_width: float
    num_slits: int

    def __post_init__(self):
        if not 0.0 < self.slit_width < self.period:
            raise ValueError(
                f"slit_width must lie in (0, period): got slit_width={self.slit_width}, "
                f"period={self.period}"
            )
        if self.num_slits < 1:
            raise ValueError(f"num_slits must be >= 1, got {self.num_slits}")


@dataclass(frozen=True)
class Species:
    """A beam particle: a monomer or a bound cluster of `cluster_size` monomers."""

    name: str
    mass: float
    cluster_size: int = 1

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.cluster_size < 1:
            raise ValueError(f"cluster_size must be >= 1, got {self.cluster_size}")


HELIUM = Species("He", HE4_MASS, 1)


def cluster_species(monomer: Species, size: int, name: str | None = None) -> Species:
    """Build the size-`size` cluster of `monomer` with exact mass size*m."""
    if monomer.cluster_size != 1:
        raise ValueError(f"monomer expected, got cluster_size={monomer.cluster_size}")
    if size < 1:
        raise ValueError(f"cluster size must be >= 1, got {size}")
    return Species(name or f"{monomer.name}{size}", size * monomer.mass, size)


@dataclass(frozen=True)
class BeamState:
    """A species moving at `velocity`; wavelength and wavenumber are derived."""

    species: Species
    velocity: float
    wavelength: float = field(init=False)
    wavenumber: float = field(init=False)

    def __post_init__(self):
        wl = de_broglie_wavelength(self.species.mass, self.velocity)
        object.__setattr__(self, "wavelength", wl)
        object.__setattr__(self, "wavenumber", 2.0 * math.pi / wl)


@dataclass(frozen=True)
class PeakParams:
    """Per-order intensity model parameters, all lengths in meters.

    s_eff is the effective slit width (smaller than the geometric width for
    an attractive particle-surface interaction), delta fills diffraction
    minima and reduces contrast, sigma damps high orders via a Gaussian
    factor, amplitude is the zeroth-order intensity.
    """

    s_eff: float
    delta: float = 0.0
    sigma: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.s_eff <= 0.0:
            raise ValueError(f"s_eff must be positive, got {self.s_eff}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.amplitude <= 0.0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")


def de_broglie_wavelength(mass: float, velocity: float) -> float:
    """Matter wavelength h/(m v) of a particle of `mass` at `velocity`."""
    if mass <= 0.0:
        raise ValueError(f"mass must be positive, got {mass}")
    if velocity <= 0.0:
        raise ValueError(f"velocity must be positive, got {velocity}")
    return PLANCK_CONSTANT / (mass * velocity)


def diffraction_angles(
    wavelength: float, grating: Grating, max_order: int
) -> list[tuple[int, float]]:
    """Principal maxima angles arcsin(n lambda / d) for |n| <= max_order.

    Orders with |n lambda / d| > 1 do not propagate and are omitted.
    """
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if max_order < 0:
        raise ValueError(f"max_order must be >= 0, got {max_order}")
    out = []
    for n in range(-max_order, max_order + 1):
        s = n * wavelength / grating.period
        if abs(s) <= 1.0:
            out.append((n, math.asin(s)))
    return out


def _periodic_ratio_sq(x, num_slits: int):
    """[sin(N x) / sin(x)]^2 with the removable singularities at x = m pi
    evaluated by a 4th-order series in u = x - m pi."""
    n = num_slits
    x = np.asarray(x, dtype=float)
    u = x - np.round(x / np.pi) * np.pi
    near = np.abs(u) < SINGULAR_LIMIT_WINDOW
    safe = np.where(near, 1.0, x)
    direct = (np.sin(n * safe) / np.sin(safe)) ** 2
    u2 = u * u
    c4 = n**4 / 120.0 - n * n / 36.0 + 7.0 / 360.0
    series = (n * (1.0 - (n * n - 1.0) * u2 / 6.0 + c4 * u2 * u2)) ** 2
    return np.where(near, series, direct)


def _sinc_sq(x):
    """[sin(x) / x]^2 with the x -> 0 limit evaluated by a 4th-order series."""
    x = np.asarray(x, dtype=float)
    near = np.abs(x) < SINGULAR_LIMIT_WINDOW
    safe = np.where(near, 1.0, x)
    direct = (np.sin(safe) / safe) ** 2
    x2 = x * x
    series = (1.0 - x2 / 6.0 + x2 * x2 / 120.0) ** 2
    return np.where(near, series, direct)


def grating_intensity(theta, grating: Grating, wavenumber: float):
    """Diffracted intensity at angle `theta`, normalized to N^2 at theta = 0.

    Product of the N-slit interference factor [sin(N d k sin(theta) / 2) /
    sin(d k sin(theta) / 2)]^2 and the single-slit envelope
    [sin(s k sin(theta) / 2) / (s k sin(theta) / 2)]^2. Finite everywhere on
    |theta| <= pi/2; removable singularities take their analytic limits.
    """
    th = np.asarray(theta, dtype=float)
    if np.any(np.abs(th) > math.pi / 2 + 1e-12):
        raise ValueError("theta must satisfy |theta| <= pi/2")
    if wavenumber <= 0.0:
        raise ValueError(f"wavenumber must be positive, got {wavenumber}")
    sin_th = np.sin(th)
    x = 0.5 * grating.period * wavenumber * sin_th
    y = 0.5 * grating.slit_width * wavenumber * sin_th
    value = _periodic_ratio_sq(x, grating.num_slits) * _sinc_sq(y)
    if np.ndim(theta) == 0:
        return float(value)
    return value


def slit_envelope(n, slit_width: float, period: float):
    """Single-slit intensity envelope sin^2(n pi s/d) / (n pi s/d)^2 at order n.

    Equals 1 at n = 0 (analytic limit). Accepts scalar or array orders.
    """
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")
    if not 0.0 < slit_width < period:
        raise ValueError(
            f"slit_width must lie in (0, period): got {slit_width}, period={period}"
        )
    x = np.asarray(n, dtype=float) * math.pi * slit_width / period
    value = _sinc_sq(x)
    if np.ndim(n) == 0:
        return float(value)
    return value


def order_intensity_model(
    n, s_eff: float, delta: float, sigma: float, amplitude: float, period: float
):
    """Raw per-order intensity model over scalar or array orders `n`.

    amplitude * exp(-(2 pi n sigma/d)^2)
             * [sin^2(pi n s_eff/d) + sinh^2(pi n delta/d)]
             / [(pi n s_eff/d)^2 + (pi n delta/d)^2]

    The n = 0 limit of the bracket is 1. Even in each of s_eff, delta and
    sigma, so the fit parameterization stays unambiguous on the closed
    positive domain. No argument validation beyond the sinh range guard;
    `order_intensity` is the checked entry point.
    """
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")
    narr = np.asarray(n, dtype=float)
    x = narr * math.pi * s_eff / period
    y = narr * math.pi * delta / period
    g = 2.0 * narr * math.pi * sigma / period
    if np.any(np.abs(y) > SINH_ARG_LIMIT):
        raise OverflowError(
            f"sinh argument n*pi*delta/period exceeds {SINH_ARG_LIMIT:g}; "
            "intensity would overflow"
        )
    denom = x * x + y * y
    near = denom < SINGULAR_LIMIT_WINDOW**2
    safe = np.where(near, 1.0, denom)
    bracket = np.where(near, 1.0, (np.sin(x) ** 2 + np.sinh(y) ** 2) / safe)
    value = amplitude * np.exp(-g * g) * bracket
    if np.ndim(n) == 0:
        return float(value)
    return value


def order_intensity(n, params: PeakParams, period: float):
    """Per-order diffraction intensity for validated `params` (see
    `order_intensity_model`); the n = 0 value is exactly the amplitude."""
    return order_intensity_model(
        n, params.s_eff, params.delta, params.sigma, params.amplitude, period
    )
