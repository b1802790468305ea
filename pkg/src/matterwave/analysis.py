"""Inverse pipeline, stage one: per-order intensities and the model fit.

`extract_order_intensities` integrates a detector scan around the expected
order angles; `fit_order_intensities` recovers the peak model parameters
(s_eff, delta, sigma, amplitude) from those intensities by damped least
squares with a deterministic coarse-grid seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lsq import solve_damped_least_squares
from .physics import PeakParams, order_intensity_model
from .synthesis import DetectorScan

EXTRACTION_WINDOW_FWHM = 3.0
"""Integration half-window around each order, in units of the local FWHM."""

UNCERTAINTY_FLOOR = 1.0
"""Smallest count uncertainty used for chi-square weights."""


class InsufficientDataError(ValueError):
    """Raised when a fit or regression has too few usable inputs."""


@dataclass(frozen=True)
class OrderIntensity:
    """Integrated counts of one diffraction order with Poisson uncertainty.

    `truncated` marks orders whose integration window collided with a
    neighbor and was cut at the midpoint.
    """

    order: int
    intensity: float
    uncertainty: float
    truncated: bool = False

    def __post_init__(self):
        if self.intensity < 0.0:
            raise ValueError(f"intensity must be >= 0, got {self.intensity}")
        if self.uncertainty < 0.0:
            raise ValueError(f"uncertainty must be >= 0, got {self.uncertainty}")


@dataclass(frozen=True)
class FitResult:
    """Peak model fit: best parameters, their 4x4 covariance over
    (s_eff, delta, sigma, amplitude), and solver diagnostics."""

    params: PeakParams
    covariance: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    orders_used: tuple[int, ...]

    @property
    def s_eff_uncertainty(self) -> float:
        return float(math.sqrt(max(self.covariance[0, 0], 0.0)))


def _local_fwhm(centers, counts, peak_index, lo_index, hi_index, background):
    """Full width at half maximum around a peak bin, by linear interpolation
    of the half-level crossings; falls back to one bin width."""
    step = centers[1] - centers[0]
    peak = counts[peak_index] - background
    if peak <= 0.0:
        return step
    half_level = background + 0.5 * peak

    def crossing(direction):
        i = peak_index
        while lo_index <= i + direction <= hi_index and counts[i + direction] >= half_level:
            i += direction
        j = i + direction
        if not lo_index <= j <= hi_index:
            return centers[i] + direction * 0.5 * step
        # interpolate between the last bin at/above and first below half level
        c_i, c_j = counts[i], counts[j]
        if c_i == c_j:
            return centers[j]
        frac = (c_i - half_level) / (c_i - c_j)
        return centers[i] + direction * frac * step

    width = crossing(+1) - crossing(-1)
    return max(width, step)


def extract_order_intensities(
    scan: DetectorScan,
    expected_angles: list[tuple[int, float]],
    background: float = 0.0,
) -> list[OrderIntensity]:
    """Integrate the scan around each expected order angle.

    Per order: locate the count maximum near the expected angle, measure
    the local FWHM, and sum background-subtracted counts over +-3 FWHM.
    Windows that would overlap a neighboring order are truncated at the
    midpoint between the two order angles and flagged. The uncertainty is
    sqrt(total counts) in the window. Orders outside the scan are omitted.
    """
    if background < 0.0:
        raise ValueError(f"background must be >= 0, got {background}")
    centers = scan.bin_centers
    counts = scan.counts.astype(float)
    step = scan.bin_width
    scan_lo = centers[0] - 0.5 * step
    scan_hi = centers[-1] + 0.5 * step

    inside = [(n, th) for n, th in expected_angles if scan_lo <= th <= scan_hi]
    inside.sort(key=lambda item: item[1])
    results_by_position: list[tuple[int, OrderIntensity]] = []

    for idx, (n, th) in enumerate(inside):
        gap_lo = inside[idx - 1][1] if idx > 0 else None
        gap_hi = inside[idx + 1][1] if idx + 1 < len(inside) else None

        # search for the peak near th, no further than halfway to a neighbor
        search = min(
            (th - gap_lo) / 2 if gap_lo is not None else np.inf,
            (gap_hi - th) / 2 if gap_hi is not None else np.inf,
        )
        if not np.isfinite(search):
            search = max(scan_hi - th, th - scan_lo)
        lo_index = int(np.searchsorted(centers, th - search, side="left"))
        hi_index = int(np.searchsorted(centers, th + search, side="right")) - 1
        lo_index = max(lo_index, 0)
        hi_index = min(hi_index, centers.size - 1)
        if hi_index < lo_index:
            lo_index = hi_index = int(np.clip(np.searchsorted(centers, th), 0, centers.size - 1))

        peak_index = lo_index + int(np.argmax(counts[lo_index : hi_index + 1]))
        fwhm = _local_fwhm(centers, counts, peak_index, lo_index, hi_index, background)

        win_lo = th - EXTRACTION_WINDOW_FWHM * fwhm
        win_hi = th + EXTRACTION_WINDOW_FWHM * fwhm
        truncated = False
        if gap_lo is not None and win_lo < (th + gap_lo) / 2:
            win_lo = (th + gap_lo) / 2
            truncated = True
        if gap_hi is not None and win_hi > (th + gap_hi) / 2:
            win_hi = (th + gap_hi) / 2
            truncated = True

        sel_lo = int(np.searchsorted(centers, win_lo, side="left"))
        sel_hi = int(np.searchsorted(centers, win_hi, side="right"))
        window = counts[sel_lo:sel_hi]
        total = float(window.sum())
        intensity = max(total - background * window.size, 0.0)
        results_by_position.append(
            (n, OrderIntensity(n, intensity, math.sqrt(total), truncated))
        )

    results_by_position.sort(key=lambda item: item[0])
    return [oi for _, oi in results_by_position]


def _grid_seeds(ns, intensities, weights, period, count=5):
    """Deterministic coarse grid over (s_eff, delta, sigma) with the
    amplitude solved in closed form per grid point.

    The model is oscillatory in s_eff, so the chi-square landscape has many
    basins; the descent is started from the `count` best grid points with
    pairwise-distinct s_eff and the best optimum kept.
    """
    candidates = []
    s_grid = np.linspace(0.025, 0.975, 39) * period
    width_grid = np.linspace(0.0, 0.15, 7) * period
    for s_eff in s_grid:
        for delta in width_grid:
            for sigma in width_grid:
                model = order_intensity_model(ns, s_eff, delta, sigma, 1.0, period)
                denom = float(np.sum(weights * model * model))
                if denom <= 0.0:
                    continue
                amplitude = float(np.sum(weights * intensities * model)) / denom
                if amplitude <= 0.0:
                    continue
                resid = (amplitude * model - intensities) * np.sqrt(weights)
                chi2 = float(resid @ resid)
                candidates.append((chi2, np.array([s_eff, delta, sigma, amplitude])))
    if not candidates:
        return [np.array([0.5 * period, 0.0, 0.0, max(float(intensities.max()), 1e-30)])]
    candidates.sort(key=lambda item: item[0])
    seeds: list[np.ndarray] = []
    min_separation = 0.03 * period
    for _, params in candidates:
        if all(abs(params[0] - s[0]) >= min_separation for s in seeds):
            seeds.append(params)
        if len(seeds) == count:
            break
    return seeds


def fit_order_intensities(
    orders: list[OrderIntensity],
    period: float,
    initial_guess: PeakParams | None = None,
    include_zeroth: bool = False,
    max_iterations: int = 200,
    step_tolerance: float = 1e-10,
    gradient_tolerance: float = 1e-8,
    uncertainty_floor: float = UNCERTAINTY_FLOOR,
) -> FitResult:
    """Fit the peak model to measured order intensities.

    Minimizes the chi-square sum(((model_n - obs_n) / max(sigma_n, floor))^2)
    over (s_eff, delta, sigma, amplitude) with s_eff in (0, period) and
    delta, sigma in [0, period) enforced by projection. The zeroth order is
    excluded by default (beam-blocked in typical setups). Without an
    initial guess a deterministic coarse grid seeds the descent. Requires
    at least 4 distinct |n| with positive intensity; non-convergence is
    reported through the `converged` flag, not an exception.
    """
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")
    usable = [
        o for o in orders if o.intensity > 0.0 and (include_zeroth or o.order != 0)
    ]
    distinct = {abs(o.order) for o in usable}
    if len(distinct) < 4:
        raise InsufficientDataError(
            f"need at least 4 distinct |order| with positive intensity, got {len(distinct)}"
        )

    ns = np.array([o.order for o in usable], dtype=float)
    obs = np.array([o.intensity for o in usable])
    sigmas = np.maximum(np.array([o.uncertainty for o in usable]), uncertainty_floor)
    weights = 1.0 / (sigmas * sigmas)

    def residual(p):
        model = order_intensity_model(ns, p[0], p[1], p[2], p[3], period)
        return (model - obs) / sigmas

    if initial_guess is not None:
        starts = [
            np.array(
                [
                    initial_guess.s_eff,
                    initial_guess.delta,
                    initial_guess.sigma,
                    initial_guess.amplitude,
                ]
            )
        ]
    else:
        starts = _grid_seeds(ns, obs, weights, period)

    eps = 1e-12 * period
    obs_scale = max(float(obs.max()), 1e-30)
    lower = np.array([eps, 0.0, 0.0, 1e-12 * obs_scale])
    upper = np.array([period - eps, period - eps, period - eps, np.inf])
    # Amplitude scaling keeps the normal equations conditioned when counts
    # and lengths differ by many orders of magnitude.
    scales = np.array([period, period, period, obs_scale])

    solution = None
    for start in starts:
        candidate = solve_damped_least_squares(
            residual,
            start,
            lower,
            upper,
            scales,
            max_iterations=max_iterations,
            step_tolerance=step_tolerance,
            gradient_tolerance=gradient_tolerance,
        )
        if solution is None or candidate.cost < solution.cost:
            solution = candidate
    s_eff, delta, sigma, amplitude = solution.params
    return FitResult(
        params=PeakParams(s_eff=s_eff, delta=delta, sigma=sigma, amplitude=amplitude),
        covariance=solution.covariance,
        residual_norm=solution.residual_norm,
        converged=solution.converged,
        iterations=solution.iterations,
        orders_used=tuple(int(o.order) for o in usable),
    )
