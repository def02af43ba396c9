"""Command-line interface.

Subcommands: ``pdc`` (source spectrum + Schmidt summary), ``sfg`` (full
single run), ``sweep`` (parameter sweep), ``schmidt`` (mode export).
Exit codes: 0 success, 2 configuration error, 3 numerical failure; any
failure also leaves a machine-readable ``error.json`` in the output
directory.
"""

import argparse
import json
import os
import sys

from .config import load_config
from .errors import ConfigError, SfgSimError
from .pipeline import export_schmidt, run_pdc, run_single, run_sweep


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sfgsim",
        description="Non-phase-matched SFG from broadband multimode squeezed vacuum",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("pdc", "compute the PDC spectrum and Schmidt summary"),
        ("sfg", "run the full pdc -> chirp -> kernel -> spectrum pipeline"),
        ("sweep", "sweep z0, alpha or pump_duration"),
        ("schmidt", "export the Schmidt decomposition as columnar text"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", default=None, help="YAML config (bundled defaults if omitted)")
        p.add_argument("--out", default=None, help="output directory (default from config)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted config override, e.g. sfg.z0_mm=0.5")
        p.add_argument("--no-correction", action="store_true",
                       help="disable the lambda^-4 detection correction")
        if name == "sweep":
            p.add_argument("--variable", choices=["z0", "alpha", "pump_duration"])
            p.add_argument("--start", type=float)
            p.add_argument("--stop", type=float)
            p.add_argument("--steps", type=int)
            p.add_argument("--probe-nm", type=float, default=None,
                           help="probe wavelength (default: degenerate sum)")
            p.add_argument("--full-spectrum", action="store_true",
                           help="compute K and width ratio R per point")
    return parser


def _sweep_overrides(args):
    out = []
    if args.variable:
        out.append(f"sweep.variable={args.variable}")
    if args.start is not None:
        out.append(f"sweep.start={args.start!r}")
    if args.stop is not None:
        out.append(f"sweep.stop={args.stop!r}")
    if args.steps is not None:
        out.append(f"sweep.steps={args.steps}")
    if args.probe_nm is not None:
        out.append(f"sweep.probe_nm={args.probe_nm!r}")
    if args.full_spectrum:
        out.append("sweep.full_spectrum=true")
    return out


def _record_error(outdir, exc, exit_code):
    try:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "error.json"), "w") as fh:
            json.dump(
                {"error_type": type(exc).__name__, "message": str(exc), "exit_code": exit_code},
                fh, indent=2,
            )
            fh.write("\n")
    except OSError:
        pass


def main(argv=None):
    args = _build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.no_correction:
        overrides.append("output.correction=false")
    if args.command == "sweep":
        overrides.extend(_sweep_overrides(args))

    outdir = args.out or "."
    try:
        cfg = load_config(args.config, overrides)
        outdir = args.out or cfg.output_path
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _record_error(outdir, exc, 2)
        return 2

    try:
        if args.command == "pdc":
            run_pdc(cfg, outdir)
        elif args.command == "sfg":
            run_single(cfg, outdir)
        elif args.command == "sweep":
            run_sweep(cfg, outdir)
        elif args.command == "schmidt":
            export_schmidt(cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _record_error(outdir, exc, 2)
        return 2
    except SfgSimError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        _record_error(outdir, exc, 3)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
