"""Inverse pipeline, stage two: velocity dependence of the effective slit width.

The effective slit width shrinks with the inverse square root of the beam
velocity; a weighted linear regression of s_eff against 1/sqrt(v) recovers
the geometric slit width as the intercept. Differencing atom and dimer
effective widths at matched velocities gives the dimer mean internuclear
distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import InsufficientDataError

VELOCITY_MATCH_TOL = 1e-6
"""Relative tolerance for treating two beam velocities as the same."""


@dataclass(frozen=True)
class SweepPoint:
    """Fitted effective slit width at one beam velocity (meters, m/s)."""

    velocity: float
    s_eff: float
    s_eff_uncertainty: float = 0.0

    def __post_init__(self):
        if self.velocity <= 0.0:
            raise ValueError(f"velocity must be positive, got {self.velocity}")
        if self.s_eff <= 0.0:
            raise ValueError(f"s_eff must be positive, got {self.s_eff}")
        if self.s_eff_uncertainty < 0.0:
            raise ValueError(
                f"s_eff_uncertainty must be >= 0, got {self.s_eff_uncertainty}"
            )


@dataclass(frozen=True)
class SweepFit:
    """Weighted linear fit s_eff = intercept + slope / sqrt(v).

    The intercept is the geometric (true) slit width; physical data should
    give a negative slope. Residuals are reported per input point, in
    input order.
    """

    intercept: float
    slope: float
    intercept_uncertainty: float
    slope_uncertainty: float
    residuals: tuple[float, ...]


@dataclass(frozen=True)
class DimerDistance:
    """Mean internuclear distance from atom/dimer effective width differences.

    per_velocity holds (velocity, r, r_uncertainty) for each matched
    velocity; negative r values indicate unphysical inputs and are reported
    as computed, with the offending velocities listed separately.
    """

    r_mean: float
    r_uncertainty: float
    per_velocity: tuple[tuple[float, float, float], ...]
    negative_velocities: tuple[float, ...]


def _regression_weights(uncertainties: np.ndarray, context: str) -> np.ndarray:
    if np.all(uncertainties == 0.0):
        return np.ones_like(uncertainties)
    if np.any(uncertainties == 0.0):
        raise ValueError(
            f"{context}: uncertainties must be all zero or all positive; "
            "a lone exact point would carry infinite weight"
        )
    return 1.0 / (uncertainties * uncertainties)


def velocity_sweep_regression(points: list[SweepPoint]) -> SweepFit:
    """Weighted least squares of s_eff on 1/sqrt(v).

    Weights are inverse variances; unit weights when every uncertainty is
    zero. Uncertainties of intercept and slope come from the inverse
    normal-equations matrix, which assumes the weights are true inverse
    variances. Needs at least 3 points spanning at least 2 velocities.
    """
    if len(points) < 3:
        raise InsufficientDataError(f"need at least 3 sweep points, got {len(points)}")
    velocities = np.array([p.velocity for p in points])
    if np.all(velocities == velocities[0]):
        raise InsufficientDataError("all sweep points share one velocity")

    x = 1.0 / np.sqrt(velocities)
    y = np.array([p.s_eff for p in points])
    weights = _regression_weights(
        np.array([p.s_eff_uncertainty for p in points]), "velocity_sweep_regression"
    )
    sqrt_w = np.sqrt(weights)
    design = np.column_stack([np.ones_like(x), x])
    coeffs, *_ = np.linalg.lstsq(design * sqrt_w[:, None], y * sqrt_w, rcond=None)
    normal = (design * weights[:, None]).T @ design
    covariance = np.linalg.inv(normal)
    residuals = y - design @ coeffs
    return SweepFit(
        intercept=float(coeffs[0]),
        slope=float(coeffs[1]),
        intercept_uncertainty=float(math.sqrt(max(covariance[0, 0], 0.0))),
        slope_uncertainty=float(math.sqrt(max(covariance[1, 1], 0.0))),
        residuals=tuple(float(r) for r in residuals),
    )


def _match_velocities(
    atom_points: list[SweepPoint], dimer_points: list[SweepPoint]
) -> list[tuple[SweepPoint, SweepPoint]]:
    pairs = []
    remaining = list(dimer_points)
    for ap in atom_points:
        best = None
        for dp in remaining:
            diff = abs(ap.velocity - dp.velocity)
            if diff <= VELOCITY_MATCH_TOL * max(ap.velocity, dp.velocity):
                if best is None or diff < abs(ap.velocity - best.velocity):
                    best = dp
        if best is not None:
            remaining.remove(best)
            pairs.append((ap, best))
    return pairs


def dimer_mean_distance(
    atom_points: list[SweepPoint], dimer_points: list[SweepPoint]
) -> DimerDistance:
    """Mean internuclear distance r = 2 (s_eff_atom - s_eff_dimer).

    Velocities are matched within a relative tolerance; the mean over
    matched velocities is inverse-variance weighted (plain mean when all
    uncertainties are zero) and point uncertainties combine in quadrature.
    """
    pairs = _match_velocities(atom_points, dimer_points)
    if not pairs:
        raise ValueError("atom and dimer sweeps share no common velocity")

    rs = np.array([2.0 * (ap.s_eff - dp.s_eff) for ap, dp in pairs])
    r_uncs = np.array(
        [
            2.0 * math.hypot(ap.s_eff_uncertainty, dp.s_eff_uncertainty)
            for ap, dp in pairs
        ]
    )
    velocities = np.array([ap.velocity for ap, _ in pairs])
    order = np.argsort(velocities)

    weights = _regression_weights(r_uncs, "dimer_mean_distance")
    r_mean = float(np.sum(weights * rs) / np.sum(weights))
    if np.all(r_uncs == 0.0):
        r_uncertainty = 0.0
    else:
        r_uncertainty = float(1.0 / math.sqrt(np.sum(weights)))

    return DimerDistance(
        r_mean=r_mean,
        r_uncertainty=r_uncertainty,
        per_velocity=tuple(
            (float(velocities[i]), float(rs[i]), float(r_uncs[i])) for i in order
        ),
        negative_velocities=tuple(float(velocities[i]) for i in order if rs[i] < 0.0),
    )
