"""Simulation benchmark: every method over repeated train/test splits of a
simulated design, emitted as tidy rows (method, q, rep, metric, value)."""
from __future__ import annotations

import os
import time
import tracemalloc
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import baselines, core, linalg
from .errors import CSPCAError
from .evaluation import centered_features, covariance_explained, kfold_cv, mse, variance_explained
from .predict import ols_fit, predict_regression
from .simdata import SimSpec, simulate, train_test_split

METHODS = ("bair", "cspca", "hsic", "pcr", "pls")
METRICS = ("var_explained", "mse", "cov_explained")
SUITES = {"sim1": 1, "sim2": 2, "sim3": 3}
KAPPA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2)
BAIR_QUANTILES = (0.0, 0.5, 0.75, 0.9, 0.95)


def worker_count() -> int:
    env = os.environ.get("CSPCA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def rep_seeds(seed: int, reps: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(reps)
    return [int(c.generate_state(1)[0]) for c in children]


def _scores(model, X_tr, Y_tr, X_te, Y_te, basis=None) -> dict:
    # variance / covariance ratios describe the fitted projection on its own
    # training rows; prediction error is measured on the held-out rows
    head = ols_fit(core.transform(model, X_tr), Y_tr)
    Y_hat = predict_regression(head, core.transform(model, X_te))
    Xc = centered_features(model, X_tr)
    B = model.W if basis is None else basis
    try:
        cov = covariance_explained(Xc, Y_tr - Y_tr.mean(axis=0), B)
    except CSPCAError:
        cov = float("nan")
    return {"var_explained": variance_explained(Xc, B), "mse": mse(Y_te, Y_hat),
            "cov_explained": cov}


def fit_method(method: str, X_tr, Y_tr, q: int, folds: int = 5, seed: int = 0,
               kappa_grid: Sequence[float] = KAPPA_GRID):
    """Fit one benchmark method on training rows; returns (model, metric basis, info)."""
    if method == "pcr":
        m = baselines.pca_fit(X_tr, q)
        return m, None, {}
    if method == "pls":
        m = baselines.pls_fit(X_tr, Y_tr, q)
        return m, linalg.orthonormal_basis(m.W), {}
    if method == "hsic":
        m = baselines.hsic_spca_fit(X_tr, Y_tr, q, kernel="rbf")
        return m, None, {"sigma": m.params["sigma"]}
    if method == "bair":
        Xc, _ = linalg.center_columns(X_tr)
        beta = np.abs(baselines.bair_scores(Xc, Y_tr[:, 0] - Y_tr[:, 0].mean()))
        # thresholds just below quantiles of |beta|, keeping at least q features
        cap = np.sort(beta)[-q]
        grid = sorted({float(min(np.quantile(beta, a), cap)) * (1 - 1e-12) for a in BAIR_QUANTILES})
        theta, _ = baselines.bair_cv_threshold(X_tr, Y_tr, grid, q, K=folds, seed=seed)
        return baselines.bair_fit(X_tr, Y_tr, theta, q), None, {"theta": theta}
    if method == "cspca":
        report = kfold_cv(X_tr, Y_tr, kappa_grid, q, K=folds, seed=seed)
        return core.fit(X_tr, Y_tr, q, report.best_kappa), None, {"kappa": report.best_kappa}
    raise ValueError(f"benchmark: unknown method {method!r}")


def run_rep(dgp: int, design: str, rep: int, seed: int, qs: Sequence[int], n: int = 100,
            p: int = 600, methods: Sequence[str] = METHODS, folds: int = 5) -> list[dict]:
    spec = SimSpec(n=n, p=p, design=design, dgp=dgp, seed=seed)
    X, Y = simulate(spec)
    train, test = train_test_split(n, 0.2, seed)
    rows = []
    for method in methods:
        for q in qs:
            model, basis, _ = fit_method(method, X[train], Y[train], q, folds=folds, seed=seed)
            scores = _scores(model, X[train], Y[train], X[test], Y[test], basis)
            for metric in METRICS:
                rows.append({"method": method, "q": q, "rep": rep, "metric": metric,
                             "value": scores[metric]})
    return rows


def run_benchmark(suite: str, design: str, reps: int, qs: Sequence[int], seed: int = 0,
                  n: int = 100, p: int = 600, methods: Sequence[str] = METHODS,
                  workers: int | None = None) -> list[dict]:
    if suite not in SUITES:
        raise ValueError(f"benchmark: unknown suite {suite!r}")
    seeds = rep_seeds(seed, reps)
    workers = worker_count() if workers is None else workers

    def job(r):
        return run_rep(SUITES[suite], design, r, seeds[r], qs, n=n, p=p, methods=methods)

    if workers > 1 and reps > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(job, range(reps)))
    else:
        chunks = [job(r) for r in range(reps)]
    rows = [row for chunk in chunks for row in chunk]
    metric_order = {m: i for i, m in enumerate(METRICS)}
    rows.sort(key=lambda r: (r["method"], r["q"], r["rep"], metric_order[r["metric"]]))
    return rows


def profile(fn: Callable, *args, **kwargs):
    """Run ``fn`` under tracemalloc; returns (result, seconds, peak traced bytes)."""
    tracemalloc.start()
    tracemalloc.reset_peak()
    t0 = time.perf_counter()
    try:
        result = fn(*args, **kwargs)
        elapsed = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return result, elapsed, peak
