"""Command-line interface.

Subcommands: simulate (synthesize a scan), fit (per-order intensities and
peak model fit), sweep (effective width vs velocity regression), dimer
(mean internuclear distance from atom/dimer sweeps), massspec (cluster
assignment from peak angles).

Exit codes: 0 success, 1 I/O error, 2 validation or insufficient data,
3 fit did not converge (the report is still written).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .analysis import extract_order_intensities, fit_order_intensities
from .clusters import assign_clusters, find_scan_peaks
from .config import RunConfig, load_config
from .constants import ANGSTROM, MRAD, NM
from .physics import de_broglie_wavelength, diffraction_angles
from .scanio import (
    SCHEMA_VERSION,
    read_json_report,
    read_scan_csv,
    read_sweep_points_csv,
    write_json_report,
    write_scan_csv,
    write_sweep_points_csv,
)
from .sweep import SweepPoint, dimer_mean_distance, velocity_sweep_regression
from .synthesis import MixtureComponent, synthesize_scan

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3


def _note(path: Path | str) -> None:
    print(f"wrote {path} (schema_version {SCHEMA_VERSION})")


def _parse_mixture(spec: str, config: RunConfig) -> list[MixtureComponent]:
    components = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, value = part.partition("=")
        if not sep:
            raise ValueError(
                f"mixture component '{part}' must look like NAME=ABUNDANCE"
            )
        entry = config.species_entry(name.strip())
        try:
            abundance = float(value)
        except ValueError:
            raise ValueError(
                f"mixture component '{part}': abundance must be a number"
            ) from None
        components.append(
            MixtureComponent(
                species=entry.species,
                abundance=abundance,
                peak_params=entry.peak_params,
            )
        )
    if not components:
        raise ValueError("mixture specification is empty")
    return components


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    mixture = _parse_mixture(args.mixture, config)
    scan = synthesize_scan(
        mixture,
        velocity=args.velocity,
        grating=config.grating,
        detector=config.detector,
        seed=args.seed,
        noise=not args.no_noise,
    )
    write_scan_csv(scan, args.output)
    _note(args.output)
    return EXIT_OK


def _cmd_fit(args) -> int:
    config = load_config(args.config)
    scan = read_scan_csv(args.scan)
    species_name = args.species or config.default_species_name()
    entry = config.species_entry(species_name)
    velocity = args.velocity if args.velocity is not None else scan.metadata.velocity
    if velocity is None:
        raise ValueError(
            "beam velocity unknown: scan has no velocity metadata, pass --velocity"
        )

    wavelength = de_broglie_wavelength(entry.species.mass, velocity)
    expected = diffraction_angles(wavelength, config.grating, args.max_order)
    orders = extract_order_intensities(scan, expected)
    result = fit_order_intensities(
        orders,
        config.grating.period,
        include_zeroth=config.solver.include_zeroth_order,
        max_iterations=config.solver.max_iterations,
        step_tolerance=config.solver.step_tolerance,
        gradient_tolerance=config.solver.gradient_tolerance,
        uncertainty_floor=config.solver.uncertainty_floor,
    )

    params = result.params
    write_json_report(
        {
            "s_eff": params.s_eff,
            "delta": params.delta,
            "sigma": params.sigma,
            "amplitude": params.amplitude,
            "s_eff_nm": params.s_eff / NM,
            "s_eff_uncertainty": result.s_eff_uncertainty,
            "covariance": [[float(v) for v in row] for row in result.covariance],
            "residual_norm": result.residual_norm,
            "converged": result.converged,
            "iterations": result.iterations,
            "orders_used": list(result.orders_used),
            "species": species_name,
            "velocity_mps": velocity,
        },
        args.output,
    )
    _note(args.output)
    if not result.converged:
        print("fit did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _sweep_point_from_report(path: Path, velocity: float | None) -> SweepPoint:
    report = read_json_report(path)
    if velocity is None:
        velocity = report.get("velocity_mps")
    if velocity is None:
        raise ValueError(
            f"{path}: report has no velocity_mps; pass the input as VELOCITY={path}"
        )
    return SweepPoint(
        velocity=float(velocity),
        s_eff=float(report["s_eff"]),
        s_eff_uncertainty=float(report.get("s_eff_uncertainty", 0.0)),
    )


def _collect_sweep_points(inputs: list[str]) -> list[SweepPoint]:
    points = []
    for item in inputs:
        velocity = None
        target = item
        if "=" in item and not Path(item).exists():
            head, _, tail = item.partition("=")
            velocity = float(head)
            target = tail
        path = Path(target)
        if path.is_dir():
            reports = sorted(path.glob("*.json"))
            if not reports:
                raise ValueError(f"{path}: directory contains no .json reports")
            points.extend(_sweep_point_from_report(p, None) for p in reports)
        else:
            points.append(_sweep_point_from_report(path, velocity))
    return points


def _cmd_sweep(args) -> int:
    points = _collect_sweep_points(args.inputs)
    fit = velocity_sweep_regression(points)
    if fit.slope > 0.0:
        print(
            "warning: positive sweep slope; physical data should give "
            "s_eff decreasing toward low velocity",
            file=sys.stderr,
        )
    write_json_report(
        {
            "intercept_s": fit.intercept,
            "slope_b": fit.slope,
            "intercept_uncertainty": fit.intercept_uncertainty,
            "slope_uncertainty": fit.slope_uncertainty,
            "intercept_s_nm": fit.intercept / NM,
            "positive_slope": fit.slope > 0.0,
            "points": [
                {
                    "velocity_mps": p.velocity,
                    "s_eff": p.s_eff,
                    "s_eff_uncertainty": p.s_eff_uncertainty,
                }
                for p in points
            ],
            "residuals": list(fit.residuals),
        },
        args.output,
    )
    _note(args.output)

    csv_path = Path(args.output).with_suffix(".csv")
    lines = ["inv_sqrt_v,s_eff,s_eff_err,model"]
    for p in points:
        x = 1.0 / math.sqrt(p.velocity)
        model_nm = (fit.intercept + fit.slope * x) / NM
        lines.append(
            f"{x!r},{p.s_eff / NM!r},{p.s_eff_uncertainty / NM!r},{model_nm!r}"
        )
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    _note(csv_path)
    return EXIT_OK


def _load_sweep_points(path: str) -> list[SweepPoint]:
    if str(path).endswith(".json"):
        report = read_json_report(path)
        rows = report.get("points")
        if not isinstance(rows, list):
            raise ValueError(f"{path}: sweep report has no points list")
        return [
            SweepPoint(
                velocity=float(row["velocity_mps"]),
                s_eff=float(row["s_eff"]),
                s_eff_uncertainty=float(row.get("s_eff_uncertainty", 0.0)),
            )
            for row in rows
        ]
    return read_sweep_points_csv(path)


def _cmd_dimer(args) -> int:
    atom_points = _load_sweep_points(args.atom)
    dimer_points = _load_sweep_points(args.dimer)
    result = dimer_mean_distance(atom_points, dimer_points)
    write_json_report(
        {
            "r_mean_m": result.r_mean,
            "r_mean_angstrom": result.r_mean / ANGSTROM,
            "r_uncertainty_m": result.r_uncertainty,
            "r_uncertainty_angstrom": result.r_uncertainty / ANGSTROM,
            "per_velocity": [
                {
                    "velocity_mps": v,
                    "r_m": r,
                    "r_angstrom": r / ANGSTROM,
                    "r_uncertainty_m": u,
                }
                for v, r, u in result.per_velocity
            ],
            "negative_velocities": list(result.negative_velocities),
        },
        args.output,
    )
    _note(args.output)
    return EXIT_OK


def _read_peak_angles_csv(path: str) -> list[float]:
    angles = []
    header_seen = False
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "angle_mrad":
                raise ValueError(
                    f"{path}:{lineno}: expected header 'angle_mrad', got '{line}'"
                )
            header_seen = True
            continue
        angles.append(float(line) * MRAD)
    if not header_seen:
        raise ValueError(f"{path}: missing 'angle_mrad' header")
    return angles


def _cmd_massspec(args) -> int:
    config = load_config(args.config)
    settings = config.assignment
    if args.scan is not None:
        scan = read_scan_csv(args.scan)
        peaks = find_scan_peaks(scan, settings.peak_prominence_fraction)
    else:
        peaks = _read_peak_angles_csv(args.peaks)

    max_cluster = args.max_cluster if args.max_cluster is not None else settings.max_cluster
    max_order = args.max_order if args.max_order is not None else settings.max_order
    tolerance = args.tolerance if args.tolerance is not None else settings.tolerance
    reference = args.reference_angle_mrad * MRAD
    result = assign_clusters(
        peaks,
        reference,
        max_cluster=max_cluster,
        max_order=max_order,
        tolerance=tolerance,
    )
    write_json_report(
        {
            "reference_angle_mrad": args.reference_angle_mrad,
            "assignments": [
                {
                    "peak_angle_mrad": a.peak_angle / MRAD,
                    "cluster_size": a.cluster_size,
                    "order": a.order,
                    "relative_residual": a.relative_residual,
                }
                for a in result.assignments
            ],
            "unassigned_count": result.unassigned_count,
            "unassigned_angles_mrad": [a / MRAD for a in result.unassigned_angles],
        },
        args.output,
    )
    _note(args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    epilog = f"report schema_version: {SCHEMA_VERSION}"
    parser = argparse.ArgumentParser(
        prog="matterwave",
        description="Matter-wave diffraction: synthesize nano-grating scans and "
        "recover slit widths, dimer size, and cluster masses.",
        epilog=epilog,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate", help="synthesize a detector scan CSV", epilog=epilog
    )
    sim.add_argument("--config", required=True, help="run configuration file")
    sim.add_argument(
        "--mixture",
        required=True,
        help="beam composition, e.g. 'He=0.9,He2=0.1' (abundances sum to 1)",
    )
    sim.add_argument("--velocity", type=float, required=True, help="beam velocity [m/s]")
    sim.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    sim.add_argument("--output", required=True, help="scan CSV to write")
    sim.add_argument(
        "--no-noise",
        action="store_true",
        help="write rounded expected counts instead of Poisson draws",
    )
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser(
        "fit", help="fit the peak model to a scan", epilog=epilog
    )
    fit.add_argument("--scan", required=True, help="scan CSV to analyze")
    fit.add_argument("--config", required=True, help="run configuration file")
    fit.add_argument("--output", required=True, help="JSON report to write")
    fit.add_argument(
        "--species",
        help="species whose orders to fit (default: first species in the config)",
    )
    fit.add_argument(
        "--velocity",
        type=float,
        help="beam velocity [m/s] (default: scan metadata)",
    )
    fit.add_argument(
        "--max-order", type=int, default=7, help="highest order to extract (default 7)"
    )
    fit.set_defaults(func=_cmd_fit)

    swp = sub.add_parser(
        "sweep",
        help="regress fitted s_eff against 1/sqrt(velocity)",
        epilog=epilog,
    )
    swp.add_argument(
        "inputs",
        nargs="+",
        help="fit report paths, VELOCITY=path pairs, or a directory of reports",
    )
    swp.add_argument("--output", required=True, help="JSON report to write "
                     "(a plot-ready CSV is written next to it)")
    swp.set_defaults(func=_cmd_sweep)

    dim = sub.add_parser(
        "dimer",
        help="dimer mean internuclear distance from atom and dimer sweeps",
        epilog=epilog,
    )
    dim.add_argument(
        "--atom", required=True, help="atom sweep points (.csv) or sweep report (.json)"
    )
    dim.add_argument(
        "--dimer", required=True, help="dimer sweep points (.csv) or sweep report (.json)"
    )
    dim.add_argument("--output", required=True, help="JSON report to write")
    dim.set_defaults(func=_cmd_dimer)

    mass = sub.add_parser(
        "massspec",
        help="assign cluster sizes to diffraction peaks",
        epilog=epilog,
    )
    source = mass.add_mutually_exclusive_group(required=True)
    source.add_argument("--scan", help="scan CSV; peaks are detected automatically")
    source.add_argument("--peaks", help="peak list CSV with header 'angle_mrad'")
    mass.add_argument(
        "--reference-angle-mrad",
        type=float,
        required=True,
        help="first-order angle of the reference monomer [mrad]",
    )
    mass.add_argument("--config", required=True, help="run configuration file")
    mass.add_argument("--output", required=True, help="JSON report to write")
    mass.add_argument("--max-cluster", type=int, help="override assignment.max_cluster")
    mass.add_argument("--max-order", type=int, help="override assignment.max_order")
    mass.add_argument("--tolerance", type=float, help="override assignment.tolerance")
    mass.set_defaults(func=_cmd_massspec)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def run() -> None:
    sys.exit(main())
