"""Matter-wave diffraction from nano-transmission gratings.

Forward model: closed-form grating intensities, per-order peak model, and
reproducible synthetic detector scans. Inverse pipeline: order intensity
extraction, peak model fitting, effective-slit-width velocity sweeps,
dimer size determination, and cluster mass assignment.
"""

from .analysis import (
    FitResult,
    InsufficientDataError,
    OrderIntensity,
    extract_order_intensities,
    fit_order_intensities,
)
from .clusters import AssignmentResult, ClusterAssignment, assign_clusters, find_scan_peaks
from .config import (
    AssignmentSettings,
    ConfigError,
    RunConfig,
    SolverSettings,
    SpeciesEntry,
    load_config,
    parse_config,
)
from .constants import ANGSTROM, HE4_MASS, MRAD, NM, PLANCK_CONSTANT
from .oracle import phasor_sum_intensity
from .physics import (
    HELIUM,
    BeamState,
    Grating,
    PeakParams,
    Species,
    cluster_species,
    de_broglie_wavelength,
    diffraction_angles,
    grating_intensity,
    order_intensity,
    order_intensity_model,
    slit_envelope,
)
from .scanio import (
    SCHEMA_VERSION,
    read_scan_csv,
    read_sweep_points_csv,
    write_scan_csv,
    write_sweep_points_csv,
)
from .sweep import (
    DimerDistance,
    SweepFit,
    SweepPoint,
    dimer_mean_distance,
    velocity_sweep_regression,
)
from .synthesis import (
    DetectorConfig,
    DetectorScan,
    MixtureComponent,
    ScanMetadata,
    expected_signal,
    synthesize_scan,
)

__version__ = "0.1.0"

__all__ = [
    "ANGSTROM",
    "AssignmentResult",
    "AssignmentSettings",
    "BeamState",
    "ClusterAssignment",
    "ConfigError",
    "DetectorConfig",
    "DetectorScan",
    "DimerDistance",
    "FitResult",
    "Grating",
    "HE4_MASS",
    "HELIUM",
    "InsufficientDataError",
    "MRAD",
    "MixtureComponent",
    "NM",
    "OrderIntensity",
    "PLANCK_CONSTANT",
    "PeakParams",
    "RunConfig",
    "SCHEMA_VERSION",
    "ScanMetadata",
    "SolverSettings",
    "Species",
    "SpeciesEntry",
    "SweepFit",
    "SweepPoint",
    "assign_clusters",
    "cluster_species",
    "de_broglie_wavelength",
    "diffraction_angles",
    "dimer_mean_distance",
    "expected_signal",
    "extract_order_intensities",
    "find_scan_peaks",
    "fit_order_intensities",
    "grating_intensity",
    "load_config",
    "order_intensity",
    "order_intensity_model",
    "parse_config",
    "phasor_sum_intensity",
    "read_scan_csv",
    "read_sweep_points_csv",
    "slit_envelope",
    "synthesize_scan",
    "velocity_sweep_regression",
    "write_scan_csv",
    "write_sweep_points_csv",
]
