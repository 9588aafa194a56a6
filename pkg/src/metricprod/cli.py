"""Command-line front end.

Each subcommand assembles a request model from the config file and
flags, runs the same handler the HTTP service uses, prints the report to
stdout, and exits 0 when all requested checks pass, 1 when a check
failed, 2 on configuration or usage errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__, configio, norms
from .service import handlers, models

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", type=Path, default=None,
                     help="YAML config file; flags override its keys")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--out", type=Path, default=None,
                     help="write the report here; tables go next to it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metricprod",
        description="validators and rank probes for norm-combined "
                    "product metrics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-phi",
                       help="check combination-functional conditions")
    _add_common(p)
    p.add_argument("--family", choices=["p_combination", "weighted_euclidean",
                                        "max_combination", "l1_combination"])
    p.add_argument("--arity", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--weights", type=float, nargs="+")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--require-5", action="store_true",
                   help="require the axis-split condition as well")

    p = sub.add_parser("check-norm", help="certify norm axioms and shape")
    _add_common(p)
    p.add_argument("--family", choices=list(norms.FAMILIES))
    p.add_argument("--dim", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--weights", type=float, nargs="+")
    p.add_argument("--variant", type=int)
    p.add_argument("--scale-n", type=int, dest="scale_n")
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("counterexample",
                       help="run the full perturbed-norm pipeline")
    _add_common(p)
    p.add_argument("--n", type=int, default=None,
                   help="skip the search and use this sharpness")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--circles", type=int, default=None)
    p.add_argument("--planes", type=int, default=None)
    p.add_argument("--section-points", type=int, default=None)

    p = sub.add_parser("probe-rank", help="lattice distortion probe")
    _add_common(p)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--grid-side", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--obstruction", action="store_true",
                   help="add the ellipse-section sweep certificate")
    p.add_argument("--planes", type=int, default=None)

    p = sub.add_parser("decompose",
                       help="factor decomposition of a built-in scenario")
    _add_common(p)
    p.add_argument("--scenario")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--side", type=int, default=None)
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--directions", type=int, default=None)

    p = sub.add_parser("length", help="product curve length check")
    _add_common(p)
    p.add_argument("--refinement", type=int, default=None)
    p.add_argument("--speed-tol", type=float, default=None)
    p.add_argument("--doublings", type=int, default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _merge(config: dict, overrides: dict) -> dict:
    merged = dict(config)
    for key, value in overrides.items():
        if value is not None and value is not False:
            merged[key] = value
    return merged


def _load(args) -> dict:
    if args.config is not None:
        return configio.load_config(args.config)
    return {}


def _norm_config_from_flags(args, config: dict) -> dict:
    norm = dict(config.get("norm", {}))
    for key, attr in [("family", "family"), ("dim", "dim"), ("p", "p"),
                      ("weights", "weights"), ("variant", "variant"),
                      ("scale", "scale_n")]:
        value = getattr(args, attr, None)
        if value is not None:
            norm[key] = value
    return norm


def _request(args):
    config = _load(args)
    if args.command == "validate-phi":
        phi = dict(config.get("phi", {}))
        for key in ("family", "arity", "p", "weights"):
            value = getattr(args, key, None)
            if value is not None:
                phi[key] = value
        body = _merge(config, {"seed": args.seed, "tol": args.tol,
                               "sample_count": args.samples})
        body["phi"] = phi
        if args.require_5:
            body["require"] = ["A", "B", "1", "2", "3", "4", "5"]
        return models.PhiValidationRequest(**body), handlers.validate_phi
    if args.command == "check-norm":
        body = _merge(config, {"seed": args.seed, "tol": args.tol,
                               "sample_count": args.samples})
        body["norm"] = _norm_config_from_flags(args, config)
        return models.NormCheckRequest(**body), handlers.check_norm
    if args.command == "counterexample":
        body = _merge(config, {
            "seed": args.seed, "n": args.n, "samples": args.samples,
            "circles": args.circles, "planes": args.planes,
            "section_points": args.section_points})
        if args.tol is not None:
            body["convexity_tol"] = args.tol
        return models.CounterexampleRequest(**body), handlers.run_counterexample
    if args.command == "probe-rank":
        body = _merge(config, {
            "seed": args.seed, "tol": args.tol, "k_min": args.k_min,
            "k_max": args.k_max, "grid_side": args.grid_side,
            "restarts": args.restarts, "planes": args.planes})
        if args.obstruction:
            body["obstruction"] = True
        return models.RankProbeRequest(**body), handlers.probe_rank
    if args.command == "decompose":
        body = _merge(config, {
            "scenario": args.scenario, "n": args.n,
            "side": args.side, "scale": args.scale,
            "direction_count": args.directions, "tol": args.tol})
        return models.DecomposeRequest(**body), handlers.decompose
    if args.command == "length":
        body = _merge(config, {
            "refinement": args.refinement, "speed_tol": args.speed_tol,
            "doublings": args.doublings})
        if args.config is not None and "config_dir" not in body:
            body["config_dir"] = str(Path(args.config).resolve().parent)
        return models.LengthRequest(**body), handlers.curve_length
    raise configio.ConfigError(f"unknown command {args.command!r}")


def _emit(response, out: Path | None) -> None:
    sys.stdout.write(response.report)
    if out is None:
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(response.report)
    for name, payload in response.tables.items():
        side = out.with_name(f"{out.stem}.{name}.csv")
        side.write_text(payload)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import create_app
        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_PASS
    try:
        request, handler = _request(args)
    except (configio.ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        response = handler(request)
    except configio.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(response, args.out)
    return EXIT_PASS if response.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
