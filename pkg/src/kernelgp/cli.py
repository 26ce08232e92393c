"""Command-line interface: ``kernelgp fit | predict | eval | demo``.

Exit codes: 0 success, 2 usage or input data, 3 kernel expression syntax,
4 numerical or fit failure, 5 model file I/O.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, casestudies, data
from .expr import KernelSyntaxError, format_kernel, parse_kernel
from .gp import (
    ConditioningError,
    FitError,
    FitOptions,
    ModelFormatError,
    fit,
    load_model,
    predict,
    regression_metrics,
    save_model,
)
from .plot import prediction_svg

OUTDIR_ENV = "KERNELGP_OUTDIR"
PREDICTION_HEADER = ["x", "mean", "variance", "lower95", "upper95"]

EXIT_USAGE, EXIT_PARSE, EXIT_FIT, EXIT_MODEL = 2, 3, 4, 5


class UsageError(Exception):
    pass


def default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "."))


def write_manifest(path, manifest: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _manifest(command, **fields):
    return {"command": command, "tool_version": __version__, **fields}


def parse_noise(text: str) -> tuple[float, bool]:
    """``fixed:V`` -> (V, False); ``opt`` -> (0, True)."""
    if text == "opt":
        return 0.0, True
    if text.startswith("fixed:"):
        try:
            value = float(text[6:])
        except ValueError:
            raise UsageError(f"bad noise value in {text!r}") from None
        if not value >= 0:
            raise UsageError("fixed noise must be >= 0")
        return value, False
    raise UsageError(f"--noise takes 'fixed:V' or 'opt', got {text!r}")


def parse_range(text: str) -> np.ndarray:
    """``a:b:m`` -> m evenly spaced points from a to b inclusive."""
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        a, b, m = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--range takes a:b:m, got {text!r}") from None
    if m < 1:
        raise UsageError("--range needs m >= 1")
    return np.linspace(a, b, m)


def parse_bound(text: str) -> tuple[str, tuple[float, float]]:
    try:
        path, rng = text.split("=", 1)
        lo, hi = (float(v) for v in rng.split(":"))
    except ValueError:
        raise UsageError(f"--bound takes PATH=LO:HI, got {text!r}") from None
    return path, (lo, hi)


def write_predictions(fh, x, pred):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(PREDICTION_HEADER)
    for row in zip(x, pred.mean, pred.variance, pred.lower95, pred.upper95):
        w.writerow([repr(float(v)) for v in row])


# -- commands ----------------------------------------------------------------


def cmd_fit(args):
    noise, optimize_noise = parse_noise(args.noise) if args.noise else (None, None)
    kernel_text = args.kernel
    if args.kernel is not None:
        parse_kernel(args.kernel, 1)  # syntax errors take priority over missing data
    if (args.data is None) == (args.demo is None):
        raise UsageError("give exactly one of --data or --demo")

    holdout = args.holdout
    if args.demo is not None:
        if args.demo not in casestudies.CASES:
            raise UsageError(f"unknown demo {args.demo!r}")
        case = casestudies.CASES[args.demo]
        series, train, test = casestudies.case_data(args.demo, args.seed)
        if holdout is not None:
            train, test = data.split_tail(series.load(), holdout)
        else:
            holdout = case.holdout
        kernel_text = kernel_text or casestudies.case_kernel(args.demo, train)
        if optimize_noise is None:
            noise, optimize_noise = 0.0, case.optimize_noise
    else:
        if kernel_text is None:
            raise UsageError("--kernel is required with --data")
        series = data.SeriesSpec("csv", path=args.data, x_col=args.x_col, y_col=args.y_col, dates=args.dates)
        full = series.load()
        train, test = data.split_tail(full, holdout) if holdout else (full, None)
        if optimize_noise is None:
            noise, optimize_noise = 0.0, False

    options = FitOptions(
        noise=noise,
        optimize_noise=optimize_noise,
        restarts=args.restarts,
        seed=args.seed,
        bounds=dict(parse_bound(b) for b in args.bound) or None,
    )
    model = fit(parse_kernel(kernel_text, train.dim), train, options)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)

    metrics = {"lml": model.lml, "train_rmse": regression_metrics(train.y, predict(model, train.X))["rmse"]}
    if test is not None:
        held = predict(model, test.X, include_noise=True)
        metrics.update({f"test_{k}": v for k, v in regression_metrics(test.y, held).items()})
    manifest_path = Path(args.manifest) if args.manifest else out.with_suffix(".manifest.json")
    write_manifest(
        manifest_path,
        _manifest(
            "fit",
            kernel=kernel_text,
            fitted_kernel=format_kernel(model.tree),
            dataset=series.to_dict(),
            options={
                "seed": args.seed,
                "restarts": args.restarts,
                "noise": "opt" if optimize_noise else f"fixed:{noise!r}",
                "holdout": holdout,
                "bounds": {k: list(v) for k, v in (options.bounds or {}).items()},
            },
            lml=model.lml,
            metrics=metrics,
            artifacts={"model": out.name},
        ),
    )
    print(f"lml: {model.lml!r}")
    print(f"kernel: {format_kernel(model.tree)}")
    print(f"sigma2: {model.sigma2!r}")
    print(f"eta2: {model.eta2!r}")
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    if (args.at is None) == (args.range is None):
        raise UsageError("give exactly one of --at or --range")
    x = parse_range(args.range) if args.range else data.load_inputs(args.at, args.x_col)
    pred = predict(model, x, include_noise=args.with_noise)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", newline="", encoding="utf-8") as fh:
            write_predictions(fh, x, pred)
        manifest_path = Path(args.manifest) if args.manifest else out.with_suffix(".manifest.json")
    else:
        write_predictions(sys.stdout, x, pred)
        manifest_path = Path(args.manifest) if args.manifest else default_outdir() / "predict.manifest.json"
    write_manifest(
        manifest_path,
        _manifest(
            "predict",
            kernel=model.kernel,
            model=str(args.model),
            query={"range": args.range} if args.range else {"csv": str(args.at)},
            options={"with_noise": args.with_noise},
            lml=model.lml,
            metrics={"n_points": int(x.size)},
            artifacts={"predictions": Path(args.out).name if args.out else "-"},
        ),
    )
    return 0


def cmd_eval(args):
    model = load_model(args.model)
    test = data.load_csv(args.test, args.x_col, args.y_col, min_rows=1)
    pred = predict(model, test.X, include_noise=True)
    metrics = regression_metrics(test.y, pred)
    metrics["lml"] = model.lml
    for key in ("rmse", "mae", "coverage95", "lml"):
        print(f"{key}: {metrics[key]!r}")
    manifest_path = Path(args.manifest) if args.manifest else default_outdir() / "eval.manifest.json"
    write_manifest(
        manifest_path,
        _manifest(
            "eval",
            kernel=model.kernel,
            model=str(args.model),
            dataset={"kind": "csv", "path": str(args.test)},
            options={},
            lml=model.lml,
            metrics=metrics,
            artifacts={},
        ),
    )
    return 0


def cmd_demo(args):
    result = casestudies.run_case(args.name, seed=args.seed, restarts=args.restarts)
    outdir = Path(args.outdir) if args.outdir else default_outdir() / args.name
    outdir.mkdir(parents=True, exist_ok=True)
    save_model(result.model, outdir / "model.json")
    data.save_csv(outdir / "train.csv", result.train)
    data.save_csv(outdir / "test.csv", result.test)
    with (outdir / "predictions.csv").open("w", newline="", encoding="utf-8") as fh:
        write_predictions(fh, result.grid, result.grid_prediction)
    pred = result.grid_prediction
    (outdir / "plot.svg").write_text(
        prediction_svg(
            result.grid,
            pred.mean,
            pred.lower95,
            pred.upper95,
            result.train.X[:, 0],
            result.train.y,
            result.test.X[:, 0],
            result.test.y,
            title=f"{args.name}: {casestudies.CASES[args.name].description}",
        ),
        encoding="utf-8",
    )
    case = casestudies.CASES[args.name]
    write_manifest(
        outdir / "manifest.json",
        _manifest(
            "demo",
            demo=args.name,
            kernel=result.kernel_source,
            fitted_kernel=format_kernel(result.model.tree),
            dataset=result.series.to_dict(),
            options={
                "seed": args.seed,
                "restarts": args.restarts,
                "noise": "opt" if case.optimize_noise else "fixed:0.0",
                "holdout": case.holdout,
            },
            lml=result.model.lml,
            metrics=result.metrics,
            artifacts={
                "model": "model.json",
                "predictions": "predictions.csv",
                "plot": "plot.svg",
                "train": "train.csv",
                "test": "test.csv",
            },
        ),
    )
    for key, value in result.metrics.items():
        print(f"{key}: {value!r}")
    print(f"artifacts: {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kernelgp", description="Gaussian process regression with composable kernels.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to a CSV series or a demo dataset")
    p.add_argument("--data", help="CSV file with x and y columns")
    p.add_argument("--demo", help="use a demo dataset: " + ", ".join(casestudies.CASES))
    p.add_argument("--kernel", help='kernel expression, e.g. "SE * PERIODIC + RQ"')
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--noise", help="fixed:V (nugget, relative to process variance) or opt")
    p.add_argument("--holdout", type=float, help="hold out this chronological tail fraction")
    p.add_argument("--bound", action="append", default=[], metavar="PATH=LO:HI")
    p.add_argument("--x-col", default="0")
    p.add_argument("--y-col", default="1")
    p.add_argument("--dates", action="store_true", help="x column holds YYYY-MM dates")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="posterior mean and variance at new inputs")
    p.add_argument("--model", required=True)
    p.add_argument("--at", help="CSV file of query inputs")
    p.add_argument("--range", help="a:b:m grid, inclusive")
    p.add_argument("--x-col", default="0")
    p.add_argument("--with-noise", action="store_true", help="include observation noise in the variance")
    p.add_argument("--out", help="CSV file to write (default: standard output)")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score a model on a test CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--x-col", default="0")
    p.add_argument("--y-col", default="1")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo", help="run a worked example end to end")
    p.add_argument("name", choices=list(casestudies.CASES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--outdir")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KernelSyntaxError as exc:
        print(f"error: {exc.pretty()}", file=sys.stderr)
        return EXIT_PARSE
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (FitError, ConditioningError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in getattr(exc, "diagnostics", []):
            print(f"  {line}", file=sys.stderr)
        return EXIT_FIT
    except (UsageError, data.DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
