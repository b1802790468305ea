"""Synthetic detector scans with known ground truth.

Builds angle-resolved count spectra for a cluster mixture passing a
transmission grating: peaks sit at the per-species diffraction angles,
peak weights follow the per-order intensity model, the line shape is the
instrument Gaussian, and counting noise is Poisson per bin. Scans are
reproducible bit for bit from the seed, which makes them usable as ground
truth for the inverse pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import FWHM_TO_SIGMA
from .physics import BeamState, Grating, PeakParams, Species, order_intensity

ABUNDANCE_SUM_TOL = 1e-9

_TAIL_MARGIN_FWHM = 5.0
"""Orders centered within this many FWHM outside the window still
contribute their tails to edge bins."""


@dataclass(frozen=True)
class DetectorConfig:
    """Scanning detector model: `num_bins` equal bins covering
    [angle_min, angle_max] radians, Gaussian response of the given FWHM,
    and expected counts `exposure_scale` at the zeroth-order peak maximum."""

    angle_min: float
    angle_max: float
    num_bins: int
    resolution_fwhm: float
    exposure_scale: float

    def __post_init__(self):
        if not self.angle_min < self.angle_max:
            raise ValueError(
                f"angle_min must be < angle_max, got [{self.angle_min}, {self.angle_max}]"
            )
        if self.num_bins < 2:
            raise ValueError(f"num_bins must be >= 2, got {self.num_bins}")
        if self.resolution_fwhm <= 0.0:
            raise ValueError(
                f"resolution_fwhm must be positive, got {self.resolution_fwhm}"
            )
        if self.exposure_scale <= 0.0:
            raise ValueError(
                f"exposure_scale must be positive, got {self.exposure_scale}"
            )

    @property
    def bin_width(self) -> float:
        return (self.angle_max - self.angle_min) / self.num_bins

    def bin_centers(self) -> np.ndarray:
        step = self.bin_width
        return self.angle_min + (np.arange(self.num_bins) + 0.5) * step


@dataclass(frozen=True)
class MixtureComponent:
    """One beam species with its relative abundance and peak model."""

    species: Species
    abundance: float
    peak_params: PeakParams

    def __post_init__(self):
        if self.abundance < 0.0:
            raise ValueError(f"abundance must be >= 0, got {self.abundance}")


@dataclass(frozen=True)
class ScanMetadata:
    velocity: float | None = None
    grating: Grating | None = None
    seed: int | None = None
    synthetic: bool = False


@dataclass(frozen=True)
class DetectorScan:
    """Angle-resolved counts on a uniform bin grid (angles in radians)."""

    bin_centers: np.ndarray
    counts: np.ndarray
    metadata: ScanMetadata = ScanMetadata()

    def __post_init__(self):
        centers = np.asarray(self.bin_centers, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if centers.ndim != 1 or counts.shape != centers.shape:
            raise ValueError(
                f"bin_centers and counts must be 1-d and equal length, got "
                f"{centers.shape} and {counts.shape}"
            )
        if centers.size < 2:
            raise ValueError("a scan needs at least 2 bins")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        steps = np.diff(centers)
        if np.any(steps <= 0.0):
            raise ValueError("bin_centers must be strictly increasing")
        mean_step = float(steps.mean())
        if np.any(np.abs(steps - mean_step) > 1e-9 * abs(mean_step)):
            raise ValueError("bin_centers must be uniformly spaced")
        centers.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_centers", centers)
        object.__setattr__(self, "counts", counts)

    @property
    def bin_width(self) -> float:
        return float(self.bin_centers[1] - self.bin_centers[0])


def _validate_mixture(mixture) -> None:
    if not mixture:
        raise ValueError("mixture must contain at least one component")
    total = math.fsum(c.abundance for c in mixture)
    if abs(total - 1.0) > ABUNDANCE_SUM_TOL:
        raise ValueError(
            f"mixture abundances must sum to 1 within {ABUNDANCE_SUM_TOL:g}, "
            f"got {total!r}"
        )


def expected_signal(
    mixture: list[MixtureComponent],
    velocity: float,
    grating: Grating,
    detector: DetectorConfig,
) -> np.ndarray:
    """Noise-free expected counts per bin.

    Sum over components and diffraction orders of Gaussian peaks centered on
    the per-species order angles. Each component is normalized by its own
    zeroth-order intensity, so the expected count at the zeroth-order
    maximum is exposure_scale and the signal is exactly linear in the
    component abundances.
    """
    _validate_mixture(mixture)
    centers = detector.bin_centers()
    sigma_w = detector.resolution_fwhm * FWHM_TO_SIGMA
    margin = _TAIL_MARGIN_FWHM * detector.resolution_fwhm
    lo = detector.angle_min - margin
    hi = detector.angle_max + margin

    total = np.zeros_like(centers)
    for component in mixture:
        if component.abundance == 0.0:
            continue
        beam = BeamState(component.species, velocity)
        ratio = beam.wavelength / grating.period
        sin_lo = max(math.sin(max(lo, -math.pi / 2)), -1.0)
        sin_hi = min(math.sin(min(hi, math.pi / 2)), 1.0)
        n_lo = math.ceil(sin_lo / ratio)
        n_hi = math.floor(sin_hi / ratio)
        for n in range(n_lo, n_hi + 1):
            angle = math.asin(n * ratio)
            if not lo <= angle <= hi:
                continue
            weight = (
                order_intensity(n, component.peak_params, grating.period)
                / component.peak_params.amplitude
            )
            arg = (centers - angle) / sigma_w
            total += component.abundance * weight * np.exp(-0.5 * arg * arg)
    return detector.exposure_scale * total


def synthesize_scan(
    mixture: list[MixtureComponent],
    velocity: float,
    grating: Grating,
    detector: DetectorConfig,
    seed: int = 0,
    noise: bool = True,
) -> DetectorScan:
    """Generate a synthetic scan; identical inputs and seed give identical
    counts. With `noise` the bins are independent Poisson draws of the
    expected signal, otherwise expected values rounded to nearest integer."""
    expected = expected_signal(mixture, velocity, grating, detector)
    if noise:
        counts = np.random.default_rng(seed).poisson(expected)
    else:
        counts = np.rint(expected).astype(np.int64)
    return DetectorScan(
        bin_centers=detector.bin_centers(),
        counts=counts,
        metadata=ScanMetadata(velocity=velocity, grating=grating, seed=seed, synthetic=True),
    )
