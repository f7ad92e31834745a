"""Command-line front end.

    python -m ionsquid stability|drive|couple|validate|sweep [options]

A JSON config may hold ``circuit``, ``ion``, ``drive`` and ``run`` sections;
missing physical sections fall back to the reference Be+ / 1 GHz setup and
flags override both.  Every output starts with a commented metadata block
holding the resolved config.

Exit codes: 0 success, 2 config or validation, 3 drive domain,
4 instability, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .corrections import junction_array, leading_correction
from .coupling import (
    SWEEP_COLUMNS,
    circuit_mode,
    coupling_strength,
    perturbative_coupling,
    sweep_eta,
)
from .drive import WAVEFORM_COLUMNS, classical_solution, synthesize_flux, verify_roundtrip, waveform_rows
from .dynamics import TRAJECTORY_COLUMNS, rwa_validate
from .errors import (
    BoundaryNotFoundError,
    DriveTooStrongError,
    DynamicsInstabilityError,
    IntegrationError,
    NearResonanceWarning,
    NoCleanExchangeError,
    SynthesisMismatchError,
    UnstableError,
)
from .floquet import DEFAULT_TOL
from .io import write_csv, write_json
from .params import (
    CircuitParams,
    DriveParams,
    IonParams,
    SystemParams,
    ion_for_dressed_frequency,
    paper_params,
)
from .stability import CSV_COLUMNS, GridSpec, boundary_eta, stability_map

EXIT_OK, EXIT_CONFIG, EXIT_DRIVE, EXIT_UNSTABLE, EXIT_NUMERIC = 0, 2, 3, 4, 5
MAX_SCALED_RATIO = 500

RUN_DEFAULTS = {
    "out_dir": ".",
    "threads": 1,
    "tol": DEFAULT_TOL,
    "grid": None,
    "convention": "drive",
    "n_samples": 1024,
    "periods": 10,
    "sweep": None,
    "corrections": False,
    "junctions": 100,
    "ratio": 0.01,
    "eta": None,
    "kappa": None,
    "max_relative_error": 0.05,
    "allow_large_ratio": False,
    "trajectory_stride": None,
}


class ConfigError(ValueError):
    pass


def _parse_grid(text):
    try:
        nr, ne = (int(v) for v in str(text).lower().split("x"))
    except ValueError:
        raise ConfigError(f"--grid expects NRxNE (e.g. 50x50), got {text!r}") from None
    return {"n_ratio": nr, "n_eta": ne}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with circuit/ion/drive/run sections")
    common.add_argument("--out-dir", help="directory for CSV/JSON outputs")
    common.add_argument("--threads", type=int, help="worker processes for grids and sweeps")
    common.add_argument("--tol", type=float, help="ODE relative tolerance")
    common.add_argument("--eta", type=float, help="inductance modulation depth")
    common.add_argument("--omega-d", type=float, dest="omega_d", help="drive frequency / omega_0")
    common.add_argument("--beta", type=float, help="junction-to-loop energy ratio L E_J / phi0^2")
    common.add_argument("--ratio", type=float, help="omega_i / omega_0")
    common.add_argument("--grid", help="grid size NRxNE")
    common.add_argument(
        "--allow-large-ratio",
        action="store_true",
        default=None,
        help=f"permit validate runs with omega_0/omega_i > {MAX_SCALED_RATIO}",
    )
    common.add_argument(
        "--corrections", action="store_true", default=None, help="add the correction report"
    )

    parser = argparse.ArgumentParser(prog="ionsquid", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stability", parents=[common], help="stability map over (omega_i/omega_0, eta)")
    sub.add_parser("drive", parents=[common], help="flux waveform for a sinusoidal inductance")
    sub.add_parser("couple", parents=[common], help="coupling rate at one drive point")
    sub.add_parser("validate", parents=[common], help="time-domain check of the coupling rate")
    sub.add_parser("sweep", parents=[common], help="coupling rate along an eta sweep")
    return parser


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {"circuit", "ion", "drive", "run"}
    if unknown:
        raise ConfigError(f"unknown config section {sorted(unknown)[0]!r}")
    return doc


def _section(doc, name, cls):
    section = doc.get(name, {})
    bad = set(section) - {f.name for f in fields(cls)}
    if bad:
        raise ConfigError(f"unknown key {name}.{sorted(bad)[0]}")
    return section


def resolve(args) -> tuple[SystemParams, dict]:
    """Merge defaults, config file and flags into (params, run options)."""
    doc = _load_config(args.config)
    run = dict(RUN_DEFAULTS)
    bad = set(doc.get("run", {})) - set(RUN_DEFAULTS)
    if bad:
        raise ConfigError(f"unknown key run.{sorted(bad)[0]}")
    run.update(doc.get("run", {}))
    for key in ("out_dir", "threads", "tol", "allow_large_ratio", "corrections"):
        value = getattr(args, key, None)
        if value is not None:
            run[key] = value
    if args.grid is not None:
        run["grid"] = {**(run["grid"] or {}), **_parse_grid(args.grid)}
    elif isinstance(run["grid"], str):
        run["grid"] = _parse_grid(run["grid"])

    ref = paper_params()
    circuit = CircuitParams(**{**asdict(ref.circuit), **_section(doc, "circuit", CircuitParams)})
    if args.beta is not None:
        circuit = CircuitParams(
            **{**asdict(circuit), "E_J": args.beta * circuit.phi0_tilde**2 / circuit.L}
        )
    omega_0 = 1.0 / math.sqrt(circuit.L * circuit.C_sigma)
    ion = IonParams(**{**asdict(ref.ion), **_section(doc, "ion", IonParams)})
    if args.ratio is not None:
        run["ratio"] = args.ratio
        if not 0 < args.ratio < 1:
            raise ConfigError(f"--ratio must lie in (0, 1), got {args.ratio}")
        ion = ion_for_dressed_frequency(args.ratio * omega_0, circuit, ion.m, ion.d, ion.xi)
    omega_i = SystemParams(circuit, ion, ref.drive).derived.omega_i

    drive = dict(_section(doc, "drive", DriveParams))
    if args.eta is not None:
        drive["eta"] = args.eta
        run["eta"] = args.eta
    if args.omega_d is not None:
        drive["omega_d"] = args.omega_d * omega_0
    drive.setdefault("eta", 2 * math.sqrt(omega_i / omega_0))
    drive.setdefault("omega_d", omega_0 - omega_i)
    params = SystemParams(circuit, ion, DriveParams(**drive))
    return params, run


def _metadata(command, params, run):
    return {
        "command": command,
        "config": {**params.to_dict(), "run": run},
        "tolerances": {"ode_rtol": run["tol"]},
    }


def _ratio(params):
    d = params.derived
    return d.omega_i / d.omega_0


def cmd_stability(args, params, run):
    grid = dict(run["grid"] or {})
    if args.ratio is not None:
        grid.update(ratio_min=args.ratio, ratio_max=args.ratio, n_ratio=1)
    if args.eta is not None:
        grid.update(eta_min=args.eta, eta_max=args.eta, n_eta=1)
    spec = GridSpec(**grid)
    m = stability_map(spec, tol=run["tol"], threads=run["threads"], convention=run["convention"])
    out = Path(run["out_dir"])
    meta = _metadata("stability", params, run)
    write_csv(out / "stability_map.csv", CSV_COLUMNS, m.rows(), meta)
    boundary = m.boundary()
    reference = 2 * np.sqrt(m.ratios)
    write_json(
        out / "stability_map.json",
        {
            "grid": asdict(spec),
            "ratios": m.ratios,
            "boundary_eta": boundary,
            "two_sqrt_ratio": reference,
            "n_stable": int(m.stable.sum()),
            "n_cells": int(m.stable.size),
            "cell_errors": [e for e in m.errors if e],
        },
        meta,
    )
    print(f"{m.stable.sum()}/{m.stable.size} cells stable -> {out / 'stability_map.csv'}")
    return EXIT_OK


def cmd_drive(args, params, run):
    omega_0 = params.derived.omega_0
    beta = args.beta if args.beta is not None else params.derived.beta
    d = classical_solution(params.drive.eta, beta, params.drive.omega_d, n_samples=run["n_samples"])
    d = synthesize_flux(d, omega_0)
    residual = verify_roundtrip(d, periods=run["periods"], ode_tol=min(run["tol"], 1e-12))
    out = Path(run["out_dir"])
    meta = _metadata("drive", params, run)
    c = params.circuit
    write_csv(out / "drive_waveform.csv", WAVEFORM_COLUMNS, waveform_rows(d, c.C_sigma, c.phi0_tilde), meta)
    write_json(
        out / "drive_waveform.json",
        {
            "eta": d.eta,
            "beta": beta,
            "omega_d_over_omega_0": d.omega_d / omega_0,
            "roundtrip_residual": residual,
            "roundtrip_periods": run["periods"],
            "phi_x_mean": float(np.mean(d.phi_x)),
            "phi_x_min": float(np.min(d.phi_x)),
            "phi_x_max": float(np.max(d.phi_x)),
        },
        meta,
    )
    print(f"round-trip residual {residual:.3e} -> {out / 'drive_waveform.csv'}")
    return EXIT_OK


def _sweep_etas(params, run):
    spec = run["sweep"] or {}
    n = int(spec.get("n", 20))
    if "eta_max" in spec:
        return np.linspace(spec.get("eta_min", 0.0), spec["eta_max"], n)
    # stop one step short of the boundary so every point is stable
    eta_b = boundary_eta(_ratio(params), tol=1e-8, ode_tol=run["tol"])
    return np.linspace(spec.get("eta_min", 0.0), eta_b, n + 1)[:-1]


def _write_sweep(params, run, meta):
    etas = _sweep_etas(params, run)
    rows = sweep_eta(params, etas, n_samples=run["n_samples"], tol=run["tol"], threads=run["threads"])
    path = write_csv(Path(run["out_dir"]) / "coupling_sweep.csv", SWEEP_COLUMNS, rows, meta)
    return path, rows


def cmd_couple(args, params, run):
    sol = circuit_mode(params, n_samples=run["n_samples"], tol=run["tol"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NearResonanceWarning)
        result = coupling_strength(sol, params)
    estimate, bound = perturbative_coupling(params)
    payload = {
        "result": result.to_dict(),
        "perturbative": {"Omega": estimate, "Omega_bound": bound},
        "warnings": [str(w.message) for w in caught],
        "inputs": {
            "eta": params.drive.eta,
            "omega_d_over_omega_0": params.drive.omega_d / params.derived.omega_0,
            "omega_i_over_omega_0": _ratio(params),
            "beta": params.derived.beta,
            "z_0": params.derived.z_0,
        },
    }
    if run["corrections"]:
        payload["corrections"] = {
            "single": leading_correction(params, sol).to_dict(),
            "array": junction_array(params, run["junctions"], sol).to_dict(),
        }
    meta = _metadata("couple", params, run)
    out = Path(run["out_dir"])
    write_json(out / "coupling.json", payload, meta)
    if run["sweep"] is not None:
        _write_sweep(params, run, meta)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(
        f"Omega = {result.Omega:.4g} rad/s ({result.Omega_hz:.4g} Hz), "
        f"Omega_cap = {result.Omega_cap:.4g} rad/s -> {out / 'coupling.json'}"
    )
    return EXIT_OK


def cmd_sweep(args, params, run):
    path, rows = _write_sweep(params, run, _metadata("sweep", params, run))
    print(f"{len(rows)} points -> {path}")
    return EXIT_OK


def cmd_validate(args, params, run):
    ratio = float(run["ratio"])
    if not 0 < ratio < 1:
        raise ConfigError(f"ratio must lie in (0, 1), got {ratio}")
    if 1 / ratio > MAX_SCALED_RATIO * (1 + 1e-12) and not run["allow_large_ratio"]:
        print(
            f"omega_0/omega_i = {1 / ratio:.0f}: the swap time grows as (omega_0/omega_i)^2; "
            f"use a scaled ratio <= {MAX_SCALED_RATIO} (e.g. --ratio 0.01) "
            "or pass --allow-large-ratio",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    report, traj = rwa_validate(
        ratio, eta=run["eta"], kappa=run["kappa"], tol=run["tol"], keep_trajectory=True
    )
    meta = _metadata("validate", params, run)
    out = Path(run["out_dir"])
    write_json(out / "validate.json", {"report": report.to_dict()}, meta)
    if traj is not None and run["trajectory_stride"]:
        write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS, traj.rows(int(run["trajectory_stride"])), meta)
    if report.degenerate:
        print(f"warning: {report.message}", file=sys.stderr)
        return EXIT_OK
    print(
        f"Omega measured {report.Omega_measured:.6g}, predicted {report.Omega_predicted:.6g} "
        f"(units of omega_0), relative error {report.relative_error:.2e}"
    )
    if report.relative_error > run["max_relative_error"]:
        print(f"relative error above {run['max_relative_error']}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


COMMANDS = {
    "stability": cmd_stability,
    "drive": cmd_drive,
    "couple": cmd_couple,
    "validate": cmd_validate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params, run = resolve(args)
        return COMMANDS[args.command](args, params, run)
    except DriveTooStrongError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DRIVE
    except UnstableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (
        IntegrationError,
        SynthesisMismatchError,
        NoCleanExchangeError,
        DynamicsInstabilityError,
        BoundaryNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
