"""Command-line front end: ``rbfrepro <subcommand> ...``.

Exit codes: 0 success, 1 contract or parse error, 2 solver failure.
"""
import argparse
import json
import logging
import math
import sys

import numpy as np

from rbfrepro import bench
from rbfrepro.assembly import assemble, build_design
from rbfrepro.exceptions import AssemblyError, ContractError, ParseError, SingularSystemError
from rbfrepro.fields import get_field, load_scattered, sample_field, save_scattered
from rbfrepro.fit import FitOptions, data_residual, fit, load_model, save_model
from rbfrepro.kernels import KernelSpec
from rbfrepro.pointgen import Domain2, load_points, save_points

logger = logging.getLogger("rbfrepro")

PRESETS = {
    "sinc-gauss": bench.sinc_gauss_config,
    "franke-iq": bench.franke_iq_config,
    "shape-sweep": bench.shape_sweep_config,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _print_json(obj):
    print(json.dumps(_jsonable(obj), indent=1))


def _add_point_args(p, prefix, default_kind, count_flag):
    p.add_argument(f"--{prefix}", dest=f"{prefix}_kind", default=default_kind,
                   choices=("halton", "epsilon", "grid"),
                   help="point distribution")
    p.add_argument(f"--{count_flag}", dest=f"{prefix}_n", type=int,
                   help="number of points (grid/epsilon infer a near-square nx*ny)")
    p.add_argument(f"--{count_flag}-x", dest=f"{prefix}_nx", type=int)
    p.add_argument(f"--{count_flag}-y", dest=f"{prefix}_ny", type=int)


def _point_spec(args, prefix):
    return bench.PointSpec(
        kind=getattr(args, f"{prefix}_kind"),
        n=getattr(args, f"{prefix}_n"),
        nx=getattr(args, f"{prefix}_nx"),
        ny=getattr(args, f"{prefix}_ny"),
        seed=args.seed,
        jitter=args.jitter,
        start_index=getattr(args, "start_index", 1),
    )


def _domain(args):
    return Domain2.parse(args.domain) if args.domain else None


def cmd_gen_data(args):
    spec = _point_spec(args, "points")
    if args.field:
        field = get_field(args.field, _domain(args))
        data = sample_field(field, spec.generate(field.domain))
        save_scattered(data, args.out)
        logger.info("wrote %d samples of %s to %s", len(data), field.name, args.out)
    else:
        domain = _domain(args) or Domain2(0.0, 1.0, 0.0, 1.0)
        pts = spec.generate(domain)
        save_points(pts, args.out)
        logger.info("wrote %d points to %s", len(pts), args.out)
    return 0


def _fit_options(args):
    return FitOptions(
        solver_path=args.solver,
        tolerance=args.tolerance,
        initial_ridge=args.ridge,
        refine=args.refine,
    )


def _dump_system(system, path):
    table = np.column_stack([system.B, system.f])
    header = f"method={system.method.value} size={system.size}; columns: B (n), f (last)"
    np.savetxt(path, table, fmt="%.17g", header=header)


def cmd_fit(args):
    data = load_scattered(args.data)
    if args.centers_file:
        centers = load_points(args.centers_file)
    else:
        domain = _domain(args) or data.points.bounding_domain()
        centers = _point_spec(args, "centers").generate(domain)
    kernel = KernelSpec(args.kernel, args.alpha)
    if args.dump_system:
        _dump_system(assemble(build_design(data, centers, kernel), args.method), args.dump_system)
    model = fit(data, centers, kernel, args.method, _fit_options(args))
    for w in model.diagnostics.warnings:
        logger.warning(w)
    save_model(model, args.out)
    _print_json(model.diagnostics.to_dict())
    return 0


def cmd_eval(args):
    model = load_model(args.model)
    if args.points:
        pts = load_points(args.points)
        vals = model.evaluate(pts.points)
        out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
        try:
            out.write("x,y,value\n")
            for (x, y), v in zip(pts.points, vals):
                out.write(f"{x:.17g},{y:.17g},{v:.17g}\n")
        finally:
            if out is not sys.stdout:
                out.close()
        return 0
    if args.data:
        data = load_scattered(args.data)
        report = bench.error_report(model, data)
        result = {"report": report.__dict__, "residual_norm": data_residual(model, data)}
    elif args.field:
        field = get_field(args.field, _domain(args))
        nx, ny = args.grid or bench._default_eval_grid(field.name)
        result = {"report": bench.error_report(model, field, bench.GridEval(nx, ny)).__dict__}
    else:
        raise ContractError("eval needs --points, --data or --field")
    _print_json(result)
    return 0


def _config_from_args(args, sweep=False):
    if args.config:
        return bench.load_config(args.config)
    if args.preset:
        return PRESETS[args.preset]()
    centers_kinds = args.centers_kind.split(",")
    centers = tuple(
        bench.PointSpec(kind=k, n=args.centers_n, nx=args.centers_nx, ny=args.centers_ny,
                        seed=args.seed, jitter=args.jitter)
        for k in centers_kinds
    )
    kernels = tuple(args.kernel.split(","))
    if args.alpha_range:
        lo, hi, n = _floats(args.alpha_range)
        alphas = bench.alpha_range(lo, hi, int(n))
    elif args.alpha:
        alphas = tuple(_floats(args.alpha))
    elif sweep:
        alphas = {k: bench.alpha_range(*bench.DEFAULT_ALPHA_RANGES[k]) for k in kernels}
    else:
        raise ContractError("--alpha is required")
    field = args.data or args.field
    data = bench.PointSpec(kind=args.points_kind, n=args.points_n, nx=args.points_nx,
                           ny=args.points_ny, seed=args.seed, jitter=args.jitter)
    return bench.ExperimentConfig(
        field=field,
        domain=_domain(args),
        data=data,
        centers=centers,
        kernels=kernels,
        alphas=alphas,
        methods=tuple(args.methods.split(",")),
        eval_at=args.eval_at if field in ("sinc2d", "franke") else bench.TRAINING,
        eval_grid=tuple(args.grid) if args.grid else None,
        solver=args.solver,
        tolerance=args.tolerance,
        initial_ridge=args.ridge,
    )


def cmd_compare(args):
    config = _config_from_args(args)
    result = bench.compare(config)
    out = {
        "methods": list(result.methods),
        "reports": [r.__dict__ for r in result.reports],
        "mean_error_ratio": result.ratio,
        "ratio_infinite": result.ratio_infinite,
        "max_error_ratio": result.max_ratio,
        "diagnostics": [m.diagnostics.to_dict() for m in result.models],
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(_jsonable({"config": config.to_dict(), **out}), fh, indent=1)
            fh.write("\n")
    _print_json(out)
    return 0


def cmd_sweep(args):
    config = _config_from_args(args, sweep=True)
    rows = bench.sweep_alpha(config, workers=args.workers)
    bench.write_sweep_csv(rows, args.out)
    counts = bench.unfavorable_counts(rows)
    failed = sum(1 for r in rows if r.error)
    bench.write_manifest(
        args.manifest or f"{args.out}.manifest.json",
        config,
        {"output": str(args.out), "rows": len(rows), "failed_rows": failed},
    )
    summary = {f"{k}/{d}": n for (k, d), n in counts.items()}
    _print_json({"rows": len(rows), "failed_rows": failed, "ratio_le_1": summary})
    return 0


def cmd_error_grid(args):
    if args.model:
        if not args.field:
            raise ContractError("error-grid with --model needs --field")
        model = load_model(args.model)
        field = get_field(args.field, _domain(args))
        bench.write_error_grid(bench.error_grid(model, field, args.nx, args.ny), args.out)
        return 0
    config = _config_from_args(args)
    if not config.is_analytic:
        raise ContractError("error-grid needs an analytic field")
    result = bench.compare(config)
    field = get_field(config.field, config.resolved_domain())
    stem = args.out[:-4] if args.out.endswith(".csv") else args.out
    for method, model in zip(result.methods, result.models):
        path = f"{stem}_{method}.csv"
        bench.write_error_grid(bench.error_grid(model, field, args.nx, args.ny), path)
        logger.info("wrote %s", path)
    return 0


def _add_experiment_args(p, sweep=False):
    src = p.add_argument_group("experiment source")
    src.add_argument("--config", help="JSON experiment config")
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--field", default="sinc2d", choices=("sinc2d", "franke"))
    src.add_argument("--data", help="x,y,h CSV instead of an analytic field")
    src.add_argument("--domain", help="xmin,xmax,ymin,ymax")
    _add_point_args(p, "points", "halton", "n")
    p.set_defaults(points_n=1089)
    p.add_argument("--centers", dest="centers_kind", default="halton",
                   help="center distribution(s), comma-separated for sweeps")
    p.add_argument("--m", dest="centers_n", type=int, default=81)
    p.add_argument("--m-x", dest="centers_nx", type=int)
    p.add_argument("--m-y", dest="centers_ny", type=int)
    p.add_argument("--jitter", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kernel", default="gauss", help="gauss, iq, tps (comma-separated for sweeps)")
    p.add_argument("--alpha", help="shape parameter(s), comma-separated")
    if sweep:
        p.add_argument("--alpha-range", help="lo,hi,n log-spaced")
    else:
        p.set_defaults(alpha_range=None)
    p.add_argument("--methods", default="original,proposed")
    p.add_argument("--eval-at", choices=("grid", "training"), default="grid")
    p.add_argument("--grid", type=int, nargs=2, metavar=("NX", "NY"))
    _add_solver_args(p, default="qr")


def _add_solver_args(p, default):
    p.add_argument("--solver", choices=("normal", "qr"), default=default)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--ridge", type=float, default=0.0, help="fixed Tikhonov term on diag(B)")
    if not any(a.dest == "refine" for a in p._actions):
        p.add_argument("--refine", action="store_true", help="one step of iterative refinement")


def build_parser():
    parser = _Parser(prog="rbfrepro", description="Least-squares RBF approximation of scattered 2D data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="generate points, optionally sampled from a field")
    p.add_argument("--field", choices=("sinc2d", "franke"))
    _add_point_args(p, "points", "halton", "n")
    p.add_argument("--start-index", type=int, default=1)
    p.add_argument("--jitter", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--domain")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("fit", help="fit a model to an x,y,h CSV")
    p.add_argument("--data", required=True)
    _add_point_args(p, "centers", "halton", "m")
    p.add_argument("--centers-file", help="x,y CSV of centers")
    p.add_argument("--jitter", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--domain", help="center domain; default is the data bounding box")
    p.add_argument("--kernel", required=True, type=str.lower, choices=("gauss", "iq", "tps"))
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", choices=("original", "proposed"), default="proposed")
    _add_solver_args(p, default="normal")
    p.add_argument("--dump-system", help="write B and f as a plain-text matrix")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--points", help="x,y CSV; writes x,y,value")
    p.add_argument("--data", help="x,y,h CSV; prints an error report")
    p.add_argument("--field", choices=("sinc2d", "franke"))
    p.add_argument("--domain")
    p.add_argument("--grid", type=int, nargs=2, metavar=("NX", "NY"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="fit both methods and report the mean-error ratio")
    _add_experiment_args(p)
    p.add_argument("--out", help="JSON result file")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="mean-error ratio over a range of shape parameters")
    _add_experiment_args(p, sweep=True)
    p.add_argument("--out", required=True, help="sweep CSV")
    p.add_argument("--manifest", help="run manifest path (default: <out>.manifest.json)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("error-grid", help="x,y,true,approx,abs_error on a grid")
    p.add_argument("--model", help="saved model; otherwise fit both methods from the experiment args")
    _add_experiment_args(p)
    p.add_argument("--nx", type=int, default=101)
    p.add_argument("--ny", type=int, default=51)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_error_grid)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except SingularSystemError as exc:
        print(f"error: {exc} (condition estimate {exc.condition_estimate:.3g})", file=sys.stderr)
        return 2
    except (ContractError, ParseError, AssemblyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
