"""File formats shared by the command-line tools.

Scan CSV: optional `# key = value` metadata comments, then the header
`angle_mrad,counts`, then one row per bin. Angles cross the I/O boundary
in milliradians (SI radians internally), UTF-8, LF line endings, plain
decimal numbers.

Sweep-point CSV: header `velocity_mps,s_eff_nm,s_eff_err_nm`, lengths in
nanometers at the boundary.

JSON reports: every report carries `schema_version`; readers reject major
versions they do not know. Reports never contain timestamps so reruns are
byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .constants import MRAD, NM
from .physics import Grating
from .sweep import SweepPoint
from .synthesis import DetectorScan, ScanMetadata

SCHEMA_VERSION = "1.0"

SCAN_HEADER = "angle_mrad,counts"
SWEEP_HEADER = "velocity_mps,s_eff_nm,s_eff_err_nm"


def _format_number(value: float) -> str:
    return repr(float(value))


def write_scan_csv(scan: DetectorScan, path: str | Path) -> None:
    """Write a detector scan, embedding whatever metadata the scan carries."""
    meta = scan.metadata
    lines = []
    if meta.velocity is not None:
        lines.append(f"# velocity_mps = {_format_number(meta.velocity)}")
    if meta.grating is not None:
        lines.append(f"# grating_period_nm = {_format_number(meta.grating.period / NM)}")
        lines.append(
            f"# grating_slit_width_nm = {_format_number(meta.grating.slit_width / NM)}"
        )
        lines.append(f"# grating_num_slits = {meta.grating.num_slits}")
    if meta.seed is not None:
        lines.append(f"# seed = {meta.seed}")
    lines.append(f"# synthetic = {'true' if meta.synthetic else 'false'}")
    lines.append(SCAN_HEADER)
    for angle, count in zip(scan.bin_centers, scan.counts):
        lines.append(f"{_format_number(angle / MRAD)},{int(count)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _parse_metadata(pairs: dict[str, str]) -> ScanMetadata:
    velocity = float(pairs["velocity_mps"]) if "velocity_mps" in pairs else None
    seed = int(pairs["seed"]) if "seed" in pairs else None
    synthetic = pairs.get("synthetic", "false").strip().lower() == "true"
    grating = None
    keys = ("grating_period_nm", "grating_slit_width_nm", "grating_num_slits")
    if all(k in pairs for k in keys):
        grating = Grating(
            period=float(pairs["grating_period_nm"]) * NM,
            slit_width=float(pairs["grating_slit_width_nm"]) * NM,
            num_slits=int(pairs["grating_num_slits"]),
        )
    return ScanMetadata(velocity=velocity, grating=grating, seed=seed, synthetic=synthetic)


def read_scan_csv(path: str | Path) -> DetectorScan:
    """Read a detector scan; unknown metadata comments are ignored."""
    pairs: dict[str, str] = {}
    angles = []
    counts = []
    header_seen = False
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                pairs[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line != SCAN_HEADER:
                raise ValueError(
                    f"{path}:{lineno}: expected header '{SCAN_HEADER}', got '{line}'"
                )
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(fields)}")
        angles.append(float(fields[0]) * MRAD)
        counts.append(int(fields[1]))
    if not header_seen:
        raise ValueError(f"{path}: missing '{SCAN_HEADER}' header")
    if not angles:
        raise ValueError(f"{path}: scan has no data rows")
    return DetectorScan(
        bin_centers=np.array(angles),
        counts=np.array(counts, dtype=np.int64),
        metadata=_parse_metadata(pairs),
    )


def write_sweep_points_csv(points: list[SweepPoint], path: str | Path) -> None:
    lines = [SWEEP_HEADER]
    for p in points:
        lines.append(
            f"{_format_number(p.velocity)},{_format_number(p.s_eff / NM)},"
            f"{_format_number(p.s_eff_uncertainty / NM)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_sweep_points_csv(path: str | Path) -> list[SweepPoint]:
    points = []
    header_seen = False
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != SWEEP_HEADER:
                raise ValueError(
                    f"{path}:{lineno}: expected header '{SWEEP_HEADER}', got '{line}'"
                )
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        points.append(
            SweepPoint(
                velocity=float(fields[0]),
                s_eff=float(fields[1]) * NM,
                s_eff_uncertainty=float(fields[2]) * NM,
            )
        )
    if not header_seen:
        raise ValueError(f"{path}: missing '{SWEEP_HEADER}' header")
    return points


def check_schema_version(found: object, context: str) -> None:
    """Accept any minor revision of the supported major schema version."""
    if not isinstance(found, str) or "." not in found:
        raise ValueError(f"{context}: missing or malformed schema_version: {found!r}")
    major = found.split(".", 1)[0]
    supported = SCHEMA_VERSION.split(".", 1)[0]
    if major != supported:
        raise ValueError(
            f"{context}: unsupported schema_version {found} (supported major: {supported})"
        )


def write_json_report(payload: dict, path: str | Path) -> None:
    """Write a report with schema_version, sorted keys, LF endings."""
    body = dict(payload)
    body["schema_version"] = SCHEMA_VERSION
    text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def read_json_report(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ValueError(f"{path}: report must be a JSON object")
    check_schema_version(payload.get("schema_version"), str(path))
    return payload
