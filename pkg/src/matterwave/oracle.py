"""Brute-force reference for the closed-form grating intensity.

Evaluates the same physical quantity as `physics.grating_intensity` without
reusing any closed form: the N-slit interference factor is an explicit
phasor sum accumulated in extended precision, and the single-slit envelope
is the modulus-squared aperture integral (1/s) * integral_0^s exp(i q y) dy
computed by composite Gauss-Legendre quadrature. Used to validate the
analytic implementation, so it must stay independent of it.
"""

from __future__ import annotations

import math

import numpy as np

from .physics import Grating

_PANEL_ORDER = 10
_PANEL_NODES, _PANEL_WEIGHTS = np.polynomial.legendre.leggauss(_PANEL_ORDER)

_MIN_PANELS = 1000
"""At least 10^4 quadrature nodes per aperture integral."""

_LONG_PI = np.longdouble("3.14159265358979323846264338327950288")


def phasor_sum_intensity(theta: float, grating: Grating, wavenumber: float) -> float:
    """Diffracted intensity at scalar angle `theta`, normalized to N^2 at 0.

    The panel count grows with |q| s so each panel spans at most ~2 radians
    of integrand phase, keeping the quadrature error far below the roundoff
    floor of the comparison.
    """
    if abs(theta) > math.pi / 2 + 1e-12:
        raise ValueError("theta must satisfy |theta| <= pi/2")
    if wavenumber <= 0.0:
        raise ValueError(f"wavenumber must be positive, got {wavenumber}")
    q = wavenumber * math.sin(theta)

    # N-slit phasor sum in 80-bit precision: near interference zeros the sum
    # cancels almost completely and float64 accumulation noise would
    # dominate the comparison.
    slits = np.arange(grating.num_slits, dtype=np.longdouble)
    phase_step = np.longdouble(grating.period) * np.longdouble(q)
    phases = slits * phase_step
    re = np.cos(phases).sum()
    im = np.sin(phases).sum()
    interference = float(re * re + im * im)

    # Aperture integral by composite Gauss-Legendre over [0, s].
    s = grating.slit_width
    n_panels = max(_MIN_PANELS, int(math.ceil(abs(q) * s / 2.0)) + 1)
    edges = np.linspace(0.0, s, n_panels + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    half_width = 0.5 * (edges[1:] - edges[:-1])
    nodes = centers[:, None] + half_width[:, None] * _PANEL_NODES[None, :]
    weights = half_width[:, None] * _PANEL_WEIGHTS[None, :]
    phase = q * nodes
    re_ap = float(np.sum(np.asarray(weights * np.cos(phase), dtype=np.longdouble))) / s
    im_ap = float(np.sum(np.asarray(weights * np.sin(phase), dtype=np.longdouble))) / s
    aperture = re_ap * re_ap + im_ap * im_ap

    return interference * aperture
