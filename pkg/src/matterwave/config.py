"""Run configuration: a flat `key = value` text file with dotted keys.

Example:

    # grating and detector
    grating.period_nm = 100.0
    grating.slit_width_nm = 71.2
    grating.num_slits = 100
    detector.angle_min_mrad = -6.0
    detector.angle_max_mrad = 6.0
    detector.num_bins = 2400
    detector.resolution_fwhm_mrad = 0.08
    detector.exposure_scale = 1e5

    # species table; cluster mass is cluster_size * monomer mass
    species.He.monomer_mass_kg = 6.6465e-27
    species.He.cluster_size = 1
    species.He2.monomer_mass_kg = 6.6465e-27
    species.He2.cluster_size = 2
    species.He2.s_eff_nm = 58.0

Unknown keys are hard errors with their line number, so typos surface
instead of silently falling back to defaults. `#` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .constants import MRAD, NM
from .physics import Grating, PeakParams, Species
from .synthesis import DetectorConfig


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


@dataclass(frozen=True)
class SolverSettings:
    max_iterations: int = 200
    step_tolerance: float = 1e-10
    gradient_tolerance: float = 1e-8
    uncertainty_floor: float = 1.0
    include_zeroth_order: bool = False


@dataclass(frozen=True)
class AssignmentSettings:
    max_cluster: int = 26
    max_order: int = 7
    tolerance: float = 1e-3
    peak_prominence_fraction: float = 0.05


@dataclass(frozen=True)
class SpeciesEntry:
    """A species plus the peak model used when synthesizing its pattern."""

    species: Species
    peak_params: PeakParams


@dataclass(frozen=True)
class RunConfig:
    grating: Grating
    detector: DetectorConfig
    species: dict[str, SpeciesEntry] = field(default_factory=dict)
    solver: SolverSettings = SolverSettings()
    assignment: AssignmentSettings = AssignmentSettings()

    def species_entry(self, name: str) -> SpeciesEntry:
        try:
            return self.species[name]
        except KeyError:
            known = ", ".join(self.species) or "(none)"
            raise ConfigError(f"unknown species '{name}'; configured: {known}") from None

    def default_species_name(self) -> str:
        if not self.species:
            raise ConfigError("config defines no species")
        return next(iter(self.species))


_GRATING_KEYS = {"period_nm", "slit_width_nm", "num_slits"}
_DETECTOR_KEYS = {
    "angle_min_mrad",
    "angle_max_mrad",
    "num_bins",
    "resolution_fwhm_mrad",
    "exposure_scale",
}
_SPECIES_KEYS = {
    "monomer_mass_kg",
    "cluster_size",
    "s_eff_nm",
    "delta_nm",
    "sigma_nm",
    "amplitude",
}
_SOLVER_KEYS = {
    "max_iterations",
    "step_tolerance",
    "gradient_tolerance",
    "uncertainty_floor",
    "include_zeroth_order",
}
_ASSIGNMENT_KEYS = {"max_cluster", "max_order", "tolerance", "peak_prominence_fraction"}


def _scan_lines(text: str, source: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got '{line}'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got '{line}'")
        if key in entries:
            raise ConfigError(
                f"{source}:{lineno}: duplicate key '{key}' (first at line {entries[key][1]})"
            )
        entries[key] = (value, lineno)
    return entries


class _Reader:
    def __init__(self, entries: dict[str, tuple[str, int]], source: str):
        self.entries = entries
        self.source = source
        self.consumed: set[str] = set()

    def _take(self, key: str):
        if key not in self.entries:
            return None
        self.consumed.add(key)
        return self.entries[key]

    def _convert(self, key: str, kind):
        item = self._take(key)
        if item is None:
            return None
        value, lineno = item
        try:
            if kind is bool:
                lowered = value.lower()
                if lowered in ("true", "yes", "1"):
                    return True
                if lowered in ("false", "no", "0"):
                    return False
                raise ValueError(value)
            if kind is int:
                return int(value)
            return float(value)
        except ValueError:
            raise ConfigError(
                f"{self.source}:{lineno}: invalid {kind.__name__} for '{key}': '{value}'"
            ) from None

    def require(self, key: str, kind):
        result = self._convert(key, kind)
        if result is None:
            raise ConfigError(f"{self.source}: missing required key '{key}'")
        return result

    def optional(self, key: str, kind, default):
        result = self._convert(key, kind)
        return default if result is None else result

    def unknown(self) -> list[tuple[str, int]]:
        return sorted(
            ((k, lineno) for k, (_, lineno) in self.entries.items() if k not in self.consumed),
            key=lambda item: item[1],
        )


def _species_names(entries: dict[str, tuple[str, int]]) -> list[str]:
    names: list[str] = []
    for key in entries:
        if key.startswith("species."):
            parts = key.split(".")
            if len(parts) == 3 and parts[1] and parts[1] not in names:
                names.append(parts[1])
    return names


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    entries = _scan_lines(text, source)
    reader = _Reader(entries, source)

    try:
        grating = Grating(
            period=reader.require("grating.period_nm", float) * NM,
            slit_width=reader.require("grating.slit_width_nm", float) * NM,
            num_slits=reader.require("grating.num_slits", int),
        )
        detector = DetectorConfig(
            angle_min=reader.require("detector.angle_min_mrad", float) * MRAD,
            angle_max=reader.require("detector.angle_max_mrad", float) * MRAD,
            num_bins=reader.require("detector.num_bins", int),
            resolution_fwhm=reader.require("detector.resolution_fwhm_mrad", float) * MRAD,
            exposure_scale=reader.require("detector.exposure_scale", float),
        )

        species: dict[str, SpeciesEntry] = {}
        for name in _species_names(entries):
            prefix = f"species.{name}."
            monomer_mass = reader.require(prefix + "monomer_mass_kg", float)
            cluster_size = reader.optional(prefix + "cluster_size", int, 1)
            if cluster_size < 1:
                raise ConfigError(
                    f"{source}: species '{name}': cluster_size must be >= 1"
                )
            peak = PeakParams(
                s_eff=reader.optional(prefix + "s_eff_nm", float, grating.slit_width / NM)
                * NM,
                delta=reader.optional(prefix + "delta_nm", float, 0.0) * NM,
                sigma=reader.optional(prefix + "sigma_nm", float, 0.0) * NM,
                amplitude=reader.optional(prefix + "amplitude", float, 1.0),
            )
            species[name] = SpeciesEntry(
                species=Species(name, cluster_size * monomer_mass, cluster_size),
                peak_params=peak,
            )

        solver = SolverSettings(
            max_iterations=reader.optional("solver.max_iterations", int, 200),
            step_tolerance=reader.optional("solver.step_tolerance", float, 1e-10),
            gradient_tolerance=reader.optional("solver.gradient_tolerance", float, 1e-8),
            uncertainty_floor=reader.optional("solver.uncertainty_floor", float, 1.0),
            include_zeroth_order=reader.optional(
                "solver.include_zeroth_order", bool, False
            ),
        )
        assignment = AssignmentSettings(
            max_cluster=reader.optional("assignment.max_cluster", int, 26),
            max_order=reader.optional("assignment.max_order", int, 7),
            tolerance=reader.optional("assignment.tolerance", float, 1e-3),
            peak_prominence_fraction=reader.optional(
                "assignment.peak_prominence_fraction", float, 0.05
            ),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    unknown = reader.unknown()
    if unknown:
        key, lineno = unknown[0]
        raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")

    return RunConfig(
        grating=grating,
        detector=detector,
        species=species,
        solver=solver,
        assignment=assignment,
    )


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), source=str(path))
