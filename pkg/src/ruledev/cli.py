"""Command-line interface: strip generation, fitting, metrics, HTTP service.

Exit codes: 0 success, 1 solver failure, 2 validation or usage error.
A JSON config file (`--config`) may supply defaults; flags take precedence.
The service port defaults to the RULEDEV_PORT environment variable.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import formats
from .errors import RuledevError, SolverError, ValidationError
from .jobs import run_job, spec_from_obj
from .pipelines import STRIP_KINDS, gen_strip
from .surface import compute_metrics, strip_planarity_defect

DEFAULT_PORT = 8787
EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_VALIDATION = 2


def _default_port() -> int:
    try:
        return int(os.environ.get("RULEDEV_PORT", DEFAULT_PORT))
    except ValueError:
        return DEFAULT_PORT


def _add_fit_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--rulings", required=True, help="input .rul document")
    sub.add_argument("--metrics", help="write the metrics document here")
    sub.add_argument("--mesh", help="write the tessellated mesh (PLY) here")
    sub.add_argument("--control-net", dest="control_net",
                     help="write the control-net document here")
    sub.add_argument("--lambda-energy", type=float, default=None)
    sub.add_argument("--lambda-width", type=float, default=None)
    sub.add_argument("--lambda-unit", type=float, default=None)
    sub.add_argument("--samples", type=int, default=100,
                     help="normal/width sample count M (default 100)")
    sub.add_argument("--max-iterations", type=int, default=500)
    sub.add_argument("--refine", type=int, default=0,
                     help="midpoint-subdivide the rulings this many times")
    sub.add_argument("--mesh-grid", default="100x10", help="mesh tessellation, e.g. 100x10")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruledev",
        description="Quasi-developable ruled B-spline surfaces from control rulings.",
    )
    parser.add_argument("--config", help="JSON file with default option values")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-strip", help="synthesize a ruling sequence")
    gen.add_argument("--kind", required=True, choices=STRIP_KINDS)
    gen.add_argument("--count", type=int, required=True, help="number of rulings (K+1)")
    gen.add_argument("--perturbation", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output .rul path")

    relaxed = commands.add_parser("fit-relaxed", help="fit with both boundaries relaxed")
    _add_fit_arguments(relaxed)
    relaxed.add_argument("--lambda-closeness", type=float, default=None)
    relaxed.add_argument("--max-outer", type=int, default=20)
    relaxed.add_argument("--outer-tol", type=float, default=1e-3)
    relaxed.add_argument("--literal-closeness", action="store_true")

    fixed = commands.add_parser("fit-fixed", help="fit with one boundary curve fixed")
    _add_fit_arguments(fixed)
    fixed.add_argument("--curve", required=True, help="curve document for the fixed boundary")
    fixed.add_argument("--lambda-interior", type=float, default=None)

    met = commands.add_parser("metrics", help="evaluate an existing surface against rulings")
    met.add_argument("--rulings", required=True)
    met.add_argument("--control-net", dest="control_net", required=True)
    met.add_argument("--metrics", help="output path (default: stdout)")
    met.add_argument("--samples", type=int, default=100)

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--workers", type=int, default=None,
                       help="job worker threads (default: cpu count)")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv):
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        parser.error("--config needs a path")
    try:
        defaults = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(defaults, dict):
        raise ValidationError("config file must hold a JSON object")
    parser.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()})
    return argv


def _mesh_grid(text: str):
    try:
        nt, ns = text.lower().split("x")
        return int(nt), int(ns)
    except Exception as exc:
        raise ValidationError(f"bad --mesh-grid {text!r}; expected like 100x10") from exc


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _weights_obj(args) -> dict:
    out = {}
    for key in ("lambda_energy", "lambda_width", "lambda_unit",
                "lambda_interior", "lambda_closeness"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _run_fit(args, mode: str) -> int:
    doc = _read(args.rulings)
    rulings, _, _ = formats.parse_rul_document(doc)

    exports = []
    targets = {}
    for fmt, path in (("metrics", args.metrics), ("mesh", args.mesh),
                      ("control-net", args.control_net)):
        if path:
            exports.append(fmt)
            targets[fmt] = path
    if not exports:
        exports = ["metrics"]

    spec_obj = {
        "mode": mode,
        "rulings": formats.rulings_to_obj(rulings),
        "weights": _weights_obj(args),
        "samples": args.samples,
        "solver": {"max_iterations": args.max_iterations},
        "exports": exports,
        "mesh_grid": list(_mesh_grid(args.mesh_grid)),
        "refine": args.refine,
    }
    if mode == "relaxed":
        spec_obj["outer"] = {"max_outer": args.max_outer, "rel_improve_tol": args.outer_tol}
        spec_obj["literal_closeness"] = args.literal_closeness
    else:
        curve_doc = formats.parse_curve(_read(args.curve))
        spec_obj["curve"] = formats.curve_to_obj(curve_doc)

    output = run_job(spec_from_obj(spec_obj))
    for fmt, text in output.exports.items():
        if fmt in targets:
            _write(targets[fmt], text)
        else:
            sys.stdout.write(text)
    m = output.result.metrics
    print(
        f"{mode}: beta_max={m.beta_max:.4f} beta_avg={m.beta_avg:.4f} "
        f"d_max={m.d_max:.6f} d_avg={m.d_avg:.6f} "
        f"outer={output.result.outer_iterations} termination={output.result.termination}",
        file=sys.stderr,
    )
    return EXIT_OK


def _run_gen(args) -> int:
    if args.count < 2:
        raise ValidationError("--count must be at least 2 rulings")
    rulings = gen_strip(args.kind, args.count - 1, args.perturbation, args.seed)
    _write(args.out, formats.write_rulings(rulings))
    print(f"wrote {args.count} rulings to {args.out}", file=sys.stderr)
    return EXIT_OK


def _run_metrics(args) -> int:
    rulings = formats.parse_rulings(_read(args.rulings))
    surface = formats.parse_control_net(_read(args.control_net))
    report = compute_metrics(surface, rulings, args.samples)
    doc = {
        "format": formats.METRICS_FORMAT,
        "version": formats.FORMAT_VERSION,
        "mode": "evaluate",
        "beta_max": report.beta_max,
        "beta_avg": report.beta_avg,
        "d_max": report.d_max,
        "d_avg": report.d_avg,
        "sample_count": report.sample_count,
        "defects": list(report.defects),
        "planarity_defects": list(strip_planarity_defect(rulings)),
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.metrics:
        _write(args.metrics, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_serve(args) -> int:
    import uvicorn

    from .server import create_app

    port = args.port if args.port is not None else _default_port()
    app = create_app(workers=args.workers)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return EXIT_OK


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.command == "gen-strip":
            return _run_gen(args)
        if args.command == "fit-relaxed":
            return _run_fit(args, "relaxed")
        if args.command == "fit-fixed":
            return _run_fit(args, "fixed-boundary")
        if args.command == "metrics":
            return _run_metrics(args)
        if args.command == "serve":
            return _run_serve(args)
        parser.error(f"unknown command {args.command!r}")
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValidationError, RuledevError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_VALIDATION


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
