"""Quantum mass spectrometry: cluster identification from peak angles.

Clusters of size N share the beam velocity, so their diffraction angles
shrink as 1/N. Each measured peak angle is matched against the candidate
grid (n/N) * theta_ref over cluster sizes N and orders n, which reads the
cluster mass straight off the diffraction pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .synthesis import DetectorScan


@dataclass(frozen=True)
class ClusterAssignment:
    """One peak matched to diffraction order `order` of the size-
    `cluster_size` cluster; `relative_residual` is the angle mismatch in
    units of the reference angle."""

    peak_angle: float
    cluster_size: int
    order: int
    relative_residual: float


@dataclass(frozen=True)
class AssignmentResult:
    assignments: tuple[ClusterAssignment, ...]
    unassigned_angles: tuple[float, ...]

    @property
    def unassigned_count(self) -> int:
        return len(self.unassigned_angles)


def assign_clusters(
    peak_angles: list[float],
    reference_first_order: float,
    max_cluster: int = 26,
    max_order: int = 7,
    tolerance: float = 1e-3,
) -> AssignmentResult:
    """Assign each peak angle to the best (cluster size, order) pair.

    Minimizes |theta - (n/N) theta_ref| / theta_ref over 1 <= N <=
    max_cluster and 1 <= n <= max_order; ties prefer the smallest cluster,
    then the smallest order. Peaks whose best residual exceeds `tolerance`
    are reported unassigned, which is not an error.
    """
    if reference_first_order <= 0.0:
        raise ValueError(
            f"reference_first_order must be positive, got {reference_first_order}"
        )
    if max_cluster < 1:
        raise ValueError(f"max_cluster must be >= 1, got {max_cluster}")
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")

    assignments = []
    unassigned = []
    for theta in peak_angles:
        best = None
        for size in range(1, max_cluster + 1):
            for order in range(1, max_order + 1):
                predicted = (order / size) * reference_first_order
                residual = abs(theta - predicted) / reference_first_order
                if best is None or residual < best[0]:
                    best = (residual, size, order)
        residual, size, order = best
        if residual <= tolerance:
            assignments.append(ClusterAssignment(theta, size, order, residual))
        else:
            unassigned.append(theta)
    return AssignmentResult(tuple(assignments), tuple(unassigned))


def find_scan_peaks(scan: DetectorScan, prominence_fraction: float = 0.05) -> list[float]:
    """Peak center angles in a scan, by prominence-thresholded local maxima
    refined with a count-weighted centroid over the nearest bins."""
    from scipy.signal import find_peaks, peak_widths

    if not 0.0 < prominence_fraction <= 1.0:
        raise ValueError(
            f"prominence_fraction must be in (0, 1], got {prominence_fraction}"
        )
    counts = scan.counts.astype(float)
    top = counts.max()
    if top <= 0.0:
        return []
    indices, _ = find_peaks(counts, prominence=prominence_fraction * top)
    widths = peak_widths(counts, indices, rel_height=0.5)[0]
    centers = []
    for idx, width in zip(indices, widths):
        half = max(int(round(width)), 1)
        lo = max(idx - half, 0)
        hi = min(idx + half + 1, counts.size)
        weights = counts[lo:hi]
        if weights.sum() > 0.0:
            centers.append(float(np.average(scan.bin_centers[lo:hi], weights=weights)))
        else:
            centers.append(float(scan.bin_centers[idx]))
    return centers
