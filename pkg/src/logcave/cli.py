"""Command-line interface.

Every command reads CSV or model-archive JSON, emits JSON on stdout (or
to a file with -o), and is deterministic under a fixed --seed.  Exit
codes: 0 success, 2 input problem, 3 numeric/degenerate data, 4 the
optimiser failed to converge.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import classify as classify_mod
from . import functionals as functionals_mod
from . import harness as harness_mod
from . import smoothed as smoothed_mod
from .archive import load_model, make_archive, save_model
from .exceptions import (ClassTooSmall, DegenerateData, DimensionUnsupported,
                         MalformedInput, NoConvergence, NonFiniteFunctional,
                         NumericalBreakdown, SingularSmoothing)
from .simplex_integrals import second_moment_tent, trace_a_hat
from .tentfit import TentFunction, fit_lcmle
from .trace_test import run_trace_test

_INPUT_ERRORS = (MalformedInput,)
_NUMERIC_ERRORS = (DegenerateData, NumericalBreakdown, SingularSmoothing,
                   ClassTooSmall, DimensionUnsupported, NonFiniteFunctional)


def _run(fn):
    try:
        fn()
    except _INPUT_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except NoConvergence as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(4)
    except _NUMERIC_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)


def read_csv(path: str, header: bool = False, label_col: int | None = None):
    """Numeric CSV rows (and optionally a label column).

    Raises MalformedInput with the offending 1-based line number.
    """
    import csv as _csv

    rows, labels = [], []
    width = None
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        for i, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if header and i == 1:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise MalformedInput(
                    f"row has {len(row)} fields, expected {width}", line=i)
            vals = row
            if label_col is not None:
                labels.append(row[label_col])
                vals = [v for j, v in enumerate(row)
                        if j != label_col % len(row)]
            try:
                rows.append([float(v) for v in vals])
            except ValueError as exc:
                raise MalformedInput(f"non-numeric value: {exc}", line=i) from exc
    if not rows:
        raise MalformedInput("no data rows found", line=1)
    pts = np.asarray(rows, dtype=float)
    return (pts, np.asarray(labels)) if label_col is not None else pts


def _emit(obj, output: str | None):
    blob = json.dumps(obj, indent=None, sort_keys=True)
    if output:
        with open(output, "w") as fh:
            fh.write(blob)
    else:
        click.echo(blob)


def _smoothed_from(model):
    if isinstance(model, smoothed_mod.SmoothedModel):
        return model
    if isinstance(model, TentFunction):
        return smoothed_mod.smooth_tent(model)
    raise MalformedInput("this command needs a tent or smoothed model archive")


@click.group()
def main():
    """Log-concave and smoothed log-concave density estimation."""


@main.command("fit")
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--smooth", is_flag=True, help="archive the smoothed model")
@click.option("--tol", default=1e-7, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--header", is_flag=True, help="skip the first CSV row")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_fit(input_csv, smooth, tol, seed, header, output):
    """Fit the estimator on a numeric CSV and archive the model."""

    def go():
        pts = read_csv(input_csv, header=header)
        tent = fit_lcmle(pts, tol=tol)
        moments = second_moment_tent(tent)
        model = smoothed_mod.smooth_tent(tent) if smooth else tent
        if output:
            save_model(model, output)
        b = tent.b
        lam = float(np.einsum("md,de,me->m", b, moments.a_hat, b).max())
        summary = {
            "n": int(pts.shape[0]),
            "d": int(pts.shape[1]),
            "trace_a_hat": trace_a_hat(moments),
            "lambda_max": lam,
            "normalization_residual": abs(moments.normalization - 1.0),
            "converged": tent.converged,
            "archive": output,
            "content_hash": make_archive(model)["content_hash"],
        }
        click.echo(json.dumps(summary, sort_keys=True))
        if not tent.converged:
            raise NoConvergence("fit did not reach the requested tolerance",
                                tent=tent)

    _run(go)


@main.command("eval")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--points", "points_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", nargs=5, type=float,
              help="XMIN XMAX YMIN YMAX RESOLUTION (d = 2 models)")
@click.option("--method", type=click.Choice(["quad", "mc", "auto"]), default="auto",
              show_default=True)
@click.option("--mc-draws", default=100000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--log", "log_scale", is_flag=True, help="emit log-densities")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_eval(model_json, points_csv, grid, method, mc_draws, seed, log_scale, output):
    """Evaluate a model at points or on a rectangular grid."""

    def go():
        model = _smoothed_from(load_model(model_json))
        if (points_csv is None) == (not grid):
            raise MalformedInput("give exactly one of --points or --grid")
        if points_csv is not None:
            pts = np.atleast_2d(read_csv(points_csv))
            result = {"points": pts.tolist()}
        else:
            x0, x1, y0, y1, res = grid
            res = int(res)
            if model.d != 2:
                raise DimensionUnsupported("--grid needs a d = 2 model")
            xs = np.linspace(x0, x1, res)
            ys = np.linspace(y0, y1, res)
            gx, gy = np.meshgrid(xs, ys)
            pts = np.column_stack([gx.ravel(), gy.ravel()])
            result = {"xs": xs.tolist(), "ys": ys.tolist(),
                      "model_hash": make_archive(model)["content_hash"]}
        if method == "auto" and model.singular:
            click.echo("warning: singular smoothing covariance; "
                       "using Monte Carlo evaluation", err=True)
        vals = smoothed_mod.evaluate(model, pts, method=method,
                                     mc_draws=mc_draws, seed=seed, log=log_scale)
        result["values"] = np.asarray(vals).tolist()
        result["log"] = bool(log_scale)
        _emit(result, output)

    _run(go)


@main.command("sample")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.option("-m", "--draws", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_sample(model_json, draws, seed, output):
    """Draw from the smoothed model."""

    def go():
        model = _smoothed_from(load_model(model_json))
        x = smoothed_mod.sample(model, draws, seed=seed)
        _emit({"draws": x.tolist(), "seed": seed}, output)

    _run(go)


@main.command("test")
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("-B", "--replicates", "b", default=99, show_default=True)
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--source", type=click.Choice(["mle", "smoothed"]), default="mle",
              show_default=True)
@click.option("--header", is_flag=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_test(input_csv, b, alpha, seed, source, header, output):
    """Bootstrap trace test of log-concavity."""

    def go():
        pts = read_csv(input_csv, header=header)
        res = run_trace_test(pts, B=b, alpha=alpha, seed=seed,
                             resample_source=source)
        _emit(res.to_dict(), output)

    _run(go)


@main.group("classify")
def cmd_classify():
    """Train and use the plug-in classifier."""


@cmd_classify.command("train")
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--label-col", default=-1, show_default=True)
@click.option("--losses", default=None, help="comma-separated positive losses")
@click.option("--header", is_flag=True)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def cmd_classify_train(input_csv, label_col, losses, header, tol, output):
    def go():
        pts, labels = read_csv(input_csv, header=header, label_col=label_col)
        lv = None
        if losses:
            lv = [float(v) for v in losses.split(",")]
        model = classify_mod.train(pts, labels, losses=lv, tol=tol)
        archive = save_model(model, output)
        click.echo(json.dumps({
            "classes": list(model.label_names),
            "counts": model.counts.tolist(),
            "losses": model.losses.tolist(),
            "archive": output,
            "content_hash": archive["content_hash"],
        }, sort_keys=True))

    _run(go)


@cmd_classify.command("predict")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.argument("points_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--losses", default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_classify_predict(model_json, points_csv, losses, output):
    def go():
        model = load_model(model_json)
        if not isinstance(model, classify_mod.ClassifierModel):
            raise MalformedInput("archive is not a classifier")
        pts = np.atleast_2d(read_csv(points_csv))
        lv = [float(v) for v in losses.split(",")] if losses else None
        idx = classify_mod.predict(model, pts, losses=lv)
        _emit({"indices": np.asarray(idx).tolist(),
               "labels": [model.label_names[i] for i in np.atleast_1d(idx)]},
              output)

    _run(go)


@cmd_classify.command("risk")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.argument("test_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--label-col", default=-1, show_default=True)
@click.option("--losses", default=None)
@click.option("--header", is_flag=True)
def cmd_classify_risk(model_json, test_csv, label_col, losses, header):
    def go():
        model = load_model(model_json)
        if not isinstance(model, classify_mod.ClassifierModel):
            raise MalformedInput("archive is not a classifier")
        pts, labels = read_csv(test_csv, header=header, label_col=label_col)
        lv = [float(v) for v in losses.split(",")] if losses else None
        risk = classify_mod.empirical_risk(model, pts, labels, losses=lv)
        click.echo(json.dumps({"risk": risk}, sort_keys=True))

    _run(go)


@cmd_classify.command("grid")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--xlim", nargs=2, type=float, required=True)
@click.option("--ylim", nargs=2, type=float, required=True)
@click.option("--resolution", default=128, show_default=True)
@click.option("--losses", default=None)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_classify_grid(model_json, xlim, ylim, resolution, losses, output):
    def go():
        model = load_model(model_json)
        if not isinstance(model, classify_mod.ClassifierModel):
            raise MalformedInput("archive is not a classifier")
        lv = [float(v) for v in losses.split(",")] if losses else None
        grid = classify_mod.boundary_grid(model, xlim, ylim, resolution,
                                          losses_override=lv)
        _emit(grid, output)

    _run(go)


@main.command("functional")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--g", "expr", required=True,
              help='expression over x1..xd, e.g. "norm(x)**2"')
@click.option("--draws", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--reps", default=1, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_functional(model_json, expr, draws, seed, reps, output):
    """Plug-in Monte Carlo estimate of a functional of the fit."""

    def go():
        model = _smoothed_from(load_model(model_json))
        if reps > 1:
            g = functionals_mod.compile_expression(expr, model.d)
            est = functionals_mod.estimate_functional_generic(
                model, lambda X: float(np.mean(g(X))), draws, seed, reps)
        else:
            est = functionals_mod.estimate_linear_functional(model, expr,
                                                             draws, seed)
        _emit(est.to_dict(), output)

    _run(go)


@main.command("experiment")
@click.argument("scenario", type=click.Choice(
    ["ise", "pareto", "independence", "wisconsin", "trace-size", "trace-power"]))
@click.option("--d", default=2, show_default=True)
@click.option("--n", default=100, show_default=True)
@click.option("--reps", default=20, show_default=True)
@click.option("--mu-norm", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--l2", default=1.0, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def cmd_experiment(scenario, d, n, reps, mu_norm, seed, l2, output):
    """Run a registered desk-scale experiment and emit JSON results."""

    def go():
        cfg = harness_mod.ExperimentConfig(scenario=scenario, d=d, n=n,
                                           replications=reps, seed=seed)
        result = run_experiment(cfg, mu_norm=mu_norm, l2=l2)
        _emit(result, output)

    _run(go)


def run_experiment(cfg, mu_norm: float = 1.0, l2: float = 1.0) -> dict:
    """Experiment registry shared by the CLI and tests."""
    from .smoothed import smooth_tent

    out = {"scenario": cfg.scenario, "d": cfg.d, "n": cfg.n,
           "replications": cfg.replications, "seed": cfg.seed}
    if cfg.scenario == "ise":
        truth = harness_mod.mixture_density(cfg.d, mu_norm)
        rows = []
        for r in range(cfg.replications):
            data = harness_mod.gen_mixture(cfg.d, mu_norm, cfg.n, cfg.seed * 1000 + r)
            tent = fit_lcmle(data, tol=1e-6)
            model = smooth_tent(tent)
            i_sm = harness_mod.ise(lambda x: smoothed_mod.evaluate(model, x),
                                   truth, cfg.d, mu_norm, 4096, cfg.seed + r)[0]
            i_un = harness_mod.ise(tent.density, truth, cfg.d, mu_norm,
                                   4096, cfg.seed + r)[0]
            i_kde = harness_mod.oracle_kde_ise(data.points, truth, cfg.d, mu_norm,
                                               seed=cfg.seed + r)[0]
            rows.append({"smoothed": i_sm, "unsmoothed": i_un, "oracle_kde": i_kde})
        out["ise"] = rows
        for key in ("smoothed", "unsmoothed", "oracle_kde"):
            out[f"median_{key}"] = float(np.median([r[key] for r in rows]))
    elif cfg.scenario == "pareto":
        traces = [harness_mod.pareto_projection_check(3.0, 1.0, cfg.n, cfg.seed + r)
                  for r in range(cfg.replications)]
        out["traces"] = traces
        out["median_trace"] = float(np.median(traces))
    elif cfg.scenario == "independence":
        out["gap_independent"] = harness_mod.independence_check(cfg.n, cfg.seed)
        out["gap_correlated"] = harness_mod.independence_check(cfg.n, cfg.seed,
                                                               rho=0.9)
    elif cfg.scenario == "wisconsin":
        res = harness_mod.wisconsin_pipeline(L2=l2)
        out["variance_fraction"] = res["variance_fraction"]
        out["counts"] = res["counts"]
        out["grid"] = res["grid"]
    elif cfg.scenario in ("trace-size", "trace-power"):
        mu = 0.0 if cfg.scenario == "trace-size" else mu_norm
        rejections = []
        for r in range(cfg.replications):
            data = harness_mod.gen_mixture(cfg.d, mu, cfg.n, cfg.seed * 1000 + r,
                                           weights=(0.5, 0.5))
            res = run_trace_test(data, B=99, alpha=0.05, seed=cfg.seed + r)
            rejections.append(res.reject)
        out["rejection_proportion"] = float(np.mean(rejections))
    return out


@main.command("serve")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--port", default=8008, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--holdout", type=click.Path(exists=True, dir_okay=False),
              help="CSV with held-out labeled points for /risk")
@click.option("--label-col", default=-1, show_default=True)
def cmd_serve(model_json, port, host, holdout, label_col):
    """Serve grid/meta/risk JSON for the browser explorer."""

    def go():
        import uvicorn

        from .server import build_app

        model = load_model(model_json)
        if not isinstance(model, classify_mod.ClassifierModel):
            raise MalformedInput("serving requires a classifier archive")
        if model.d != 2:
            raise DimensionUnsupported("serving requires a d = 2 classifier")
        held = None
        if holdout:
            held = read_csv(holdout, label_col=label_col)
        app = build_app(model, holdout=held)
        uvicorn.run(app, host=host, port=port, log_level="warning")

    _run(go)


if __name__ == "__main__":
    main()
