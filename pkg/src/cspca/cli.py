"""Batch command line: simulate, fit, transform, predict, cv, benchmark, metrics.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from . import baselines, core, io
from .benchmark import run_benchmark, worker_count
from .errors import CSPCAError
from .evaluation import evaluate, kfold_cv
from .predict import logistic_fit, ols_fit, predict_proba, predict_regression
from .simdata import SimSpec, simulate


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _columns(text: str) -> list:
    return [c.strip() for c in text.split(",") if c.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cspca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a simulated dataset to CSV")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--p", type=int, default=600)
    s.add_argument("--design", choices=["iid", "toeplitz"], default="iid")
    s.add_argument("--rho", type=float, default=0.4)
    s.add_argument("--dgp", type=int, choices=[1, 2, 3], default=1)
    s.add_argument("--noise-sd", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="fit a projection model")
    f.add_argument("--data", required=True)
    f.add_argument("--response-col", type=_columns, required=True)
    f.add_argument("--method", choices=["cspca", "pca", "hsic", "bair", "pls", "lda"], default="cspca")
    f.add_argument("--q", type=int, default=2)
    f.add_argument("--kappa", type=float, default=None,
                   help="balance for cspca (default 1), threshold theta for bair (default 0), "
                        "ridge for lda (default 1e-3 trace(S_w)/p)")
    f.add_argument("--solver", choices=["exact", "nystrom"], default="exact")
    f.add_argument("--m", type=int, default=None)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--standardize", action="store_true")
    f.add_argument("--out", required=True)

    t = sub.add_parser("transform", help="project data with a fitted model")
    t.add_argument("--model", required=True)
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)

    pr = sub.add_parser("predict", help="predict with a model's stored head")
    pr.add_argument("--model", required=True)
    pr.add_argument("--head", choices=["ols", "logistic"], required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--out", required=True)

    c = sub.add_parser("cv", help="K-fold cross-validation of kappa")
    c.add_argument("--data", required=True)
    c.add_argument("--response-col", type=_columns, required=True)
    c.add_argument("--q", type=int, default=2)
    c.add_argument("--kappa-grid", type=_floats, default=[1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2])
    c.add_argument("--folds", type=int, default=5)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)

    b = sub.add_parser("benchmark", help="simulation benchmark to tidy CSV")
    b.add_argument("--suite", choices=["sim1", "sim2", "sim3"], required=True)
    b.add_argument("--design", choices=["iid", "toeplitz"], default="iid")
    b.add_argument("--reps", type=int, default=50)
    b.add_argument("--qs", type=_ints, default=[2, 4, 6, 8, 10])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)

    m = sub.add_parser("metrics", help="evaluation metrics of a model on a dataset")
    m.add_argument("--model", required=True)
    m.add_argument("--data", required=True)
    m.add_argument("--out", required=True)
    return parser


def _fit_model(args, ds: io.Dataset):
    resp = ds.response
    X = ds.X
    method = args.method
    if method == "cspca":
        solver = core.SolverSpec(args.solver, args.m, args.seed)
        kappa = 1.0 if args.kappa is None else args.kappa
        return core.fit(X, resp, args.q, kappa, solver=solver, standardize=args.standardize)
    if args.standardize:
        raise CSPCAError("cli.fit: --standardize is only supported for cspca")
    if method == "pca":
        model = baselines.pca_fit(X, args.q)
    elif method == "hsic":
        kernel = "delta" if resp.task == "classification" else "rbf"
        model = baselines.hsic_spca_fit(X, resp, args.q, kernel=kernel)
    elif method == "bair":
        if resp.task != "regression":
            raise CSPCAError("cli.fit: bair needs a continuous response")
        theta = 0.0 if args.kappa is None else args.kappa
        model = baselines.bair_fit(X, resp.values, theta, args.q)
    elif method == "pls":
        Y = resp.values if resp.task == "regression" else resp.values[:, None]
        model = baselines.pls_fit(X, Y, args.q)
    else:
        if resp.task != "classification":
            raise CSPCAError("cli.fit: lda needs binary labels")
        model = baselines.lda_fit(X, resp.values, ridge=args.kappa)
    if resp.task != model.task:
        model = replace(model, task=resp.task)
    return model


def _features(mf: io.ModelFile, path, with_response: bool = False) -> io.Dataset:
    """Load `path` and align its feature columns with the model's."""
    names = io.load_csv(path).feature_names
    present = [c for c in (mf.response_columns or []) if c in names]
    if with_response:
        if not present:
            raise CSPCAError(f"cli: {path} has no response column {mf.response_columns}")
        ds = io.load_csv(path, response_cols=present, task=mf.model.task)
    else:
        ds = io.load_csv(path, ignore_cols=present)
    if mf.feature_names is not None:
        missing = [c for c in mf.feature_names if c not in ds.feature_names]
        if missing:
            raise CSPCAError(f"cli: {path} lacks feature columns {missing[:5]}")
        order = [ds.feature_names.index(c) for c in mf.feature_names]
        ds.X = ds.X[:, order]
        ds.feature_names = list(mf.feature_names)
    return ds


def cmd_simulate(args) -> None:
    spec = SimSpec(n=args.n, p=args.p, design=args.design, rho=args.rho, dgp=args.dgp,
                   noise_sd=args.noise_sd, seed=args.seed)
    X, Y = simulate(spec)
    io.save_csv(args.out, X, Y)


def cmd_fit(args) -> None:
    ds = io.load_csv(args.data, response_cols=args.response_col)
    model = _fit_model(args, ds)
    Z = core.transform(model, ds.X)
    heads = {}
    if ds.response.task == "regression":
        heads["ols"] = ols_fit(Z, ds.response.values)
    else:
        heads["logistic"] = logistic_fit(Z, ds.response.values)
    io.save_model(model, args.out, heads=heads, feature_names=ds.feature_names,
                  response_columns=ds.response_columns, label_map=ds.label_map)


def cmd_transform(args) -> None:
    mf = io.load_model_file(args.model)
    ds = _features(mf, args.data)
    Z = core.transform(mf.model, ds.X)
    io.write_matrix_csv(args.out, Z, [f"z{j + 1}" for j in range(Z.shape[1])])


def cmd_predict(args) -> None:
    mf = io.load_model_file(args.model)
    if args.head not in mf.heads:
        raise CSPCAError(f"cli.predict: model has no {args.head!r} head "
                         f"(available: {sorted(mf.heads) or 'none'})")
    ds = _features(mf, args.data)
    Z = core.transform(mf.model, ds.X)
    head = mf.heads[args.head]
    if args.head == "ols":
        pred = predict_regression(head, Z)
        names = [f"pred_{c}" for c in (mf.response_columns or [f"y{j + 1}" for j in range(pred.shape[1])])]
        io.write_matrix_csv(args.out, pred, names)
    else:
        prob = predict_proba(head, Z)
        io.write_matrix_csv(args.out, np.column_stack([prob, prob >= 0.5]), ["prob_1", "label"])


def cmd_cv(args) -> None:
    ds = io.load_csv(args.data, response_cols=args.response_col)
    report = kfold_cv(ds.X, ds.response, args.kappa_grid, args.q, K=args.folds, seed=args.seed,
                      n_jobs=worker_count())
    out = report.to_dict()
    out.update({"q": args.q, "folds": args.folds, "task": ds.response.task,
                "score": "mse" if ds.response.task == "regression" else "logloss"})
    io.write_json(args.out, out)


def cmd_benchmark(args) -> None:
    rows = run_benchmark(args.suite, args.design, args.reps, args.qs, seed=args.seed)
    io.write_rows_csv(args.out, rows, ["method", "q", "rep", "metric", "value"])


def cmd_metrics(args) -> None:
    mf = io.load_model_file(args.model)
    ds = _features(mf, args.data, with_response=True)
    head = mf.heads.get("ols" if mf.model.task == "regression" else "logistic")
    report = evaluate(mf.model, ds.X, ds.response, head=head)
    io.write_json(args.out, {"method": mf.model.method, "q": mf.model.q, **report.to_dict()})


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "transform": cmd_transform,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "benchmark": cmd_benchmark,
    "metrics": cmd_metrics,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (CSPCAError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"cspca {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())

