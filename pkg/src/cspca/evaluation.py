"""Evaluation metrics and K-fold cross-validation over a hyperparameter grid."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from . import core, linalg
from .errors import CSPCAError, DimensionMismatch, OneClassOnly, ZeroCrossCovariance, ZeroData
from .predict import logistic_fit, ols_fit, predict_proba, predict_regression

PROB_CLIP = 1e-12


# ---------------------------------------------------------------- metrics

def variance_explained(Xc, W) -> float:
    """``||Xc W||_F^2 / ||Xc||_F^2``."""
    Xc = linalg.as_matrix(Xc, "Xc")
    W = linalg.as_matrix(W, "W")
    if W.shape[0] != Xc.shape[1]:
        raise DimensionMismatch(f"eval.variance_explained: W has {W.shape[0]} rows, X has {Xc.shape[1]} columns")
    total = float(np.sum(Xc * Xc))
    if total == 0:
        raise ZeroData("eval.variance_explained: data has zero Frobenius norm")
    Z = Xc @ W
    return float(np.sum(Z * Z)) / total


def covariance_explained(Xc, Yc, W) -> float:
    """``||W' Xc' Yc||_F^2 / ||Xc' Yc||_F^2``."""
    Xc = linalg.as_matrix(Xc, "Xc")
    Yc = linalg.as_matrix(Yc, "Yc")
    W = linalg.as_matrix(W, "W")
    if Xc.shape[0] != Yc.shape[0] or W.shape[0] != Xc.shape[1]:
        raise DimensionMismatch("eval.covariance_explained: inconsistent shapes "
                                f"X{Xc.shape}, Y{Yc.shape}, W{W.shape}")
    XY = Xc.T @ Yc
    total = float(np.sum(XY * XY))
    if total == 0:
        raise ZeroCrossCovariance("eval.covariance_explained: X'Y is zero")
    P = W.T @ XY
    return float(np.sum(P * P)) / total


def mse(Y, Y_hat) -> float:
    Y = linalg.as_matrix(Y, "Y")
    Y_hat = linalg.as_matrix(Y_hat, "Y_hat")
    if Y.shape != Y_hat.shape:
        raise DimensionMismatch(f"eval.mse: shapes {Y.shape} and {Y_hat.shape} differ")
    return float(np.sum((Y_hat - Y) ** 2)) / Y.shape[0]


def logloss(labels, probabilities) -> float:
    y = np.asarray(labels, dtype=float).ravel()
    prob = np.clip(np.asarray(probabilities, dtype=float).ravel(), PROB_CLIP, 1 - PROB_CLIP)
    return float(-np.mean(y * np.log(prob) + (1 - y) * np.log(1 - prob)))


def accuracy(labels, probabilities, threshold: float = 0.5) -> float:
    y = np.asarray(labels, dtype=float).ravel()
    pred = (np.asarray(probabilities, dtype=float).ravel() >= threshold).astype(float)
    return float(np.mean(pred == y))


def auc(labels, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic (ties count 1/2)."""
    y = np.asarray(labels, dtype=float).ravel()
    s = np.asarray(scores, dtype=float).ravel()
    n1 = int(np.sum(y == 1))
    n0 = int(np.sum(y == 0))
    if n1 == 0 or n0 == 0:
        raise OneClassOnly("eval.auc: both classes are required")
    ranks = rankdata(s)
    return float((ranks[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


@dataclass
class MetricsReport:
    variance_explained: float
    covariance_explained: Optional[float] = None
    mse: Optional[float] = None
    logloss: Optional[float] = None
    accuracy: Optional[float] = None
    auc: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def centered_features(model, X) -> np.ndarray:
    Xc = linalg.as_matrix(X, "X") - model.x_means
    if getattr(model, "x_scale", None) is not None:
        Xc = Xc / model.x_scale
    return Xc


def evaluate(model, X, response, head=None, basis=None) -> MetricsReport:
    """Metrics for one fitted projection (plus optional head) on data (X, response).

    X is centred with the model's training means. `basis` overrides the
    matrix used for the variance/covariance ratios (defaults to ``model.W``).
    """
    response = core.as_response(response, model.task)
    Xc = centered_features(model, X)
    B = model.W if basis is None else basis
    report = MetricsReport(variance_explained(Xc, B))
    Z = Xc @ model.W
    if response.task == "regression":
        Y = response.values
        Yc = Y - Y.mean(axis=0)
        try:
            report.covariance_explained = covariance_explained(Xc, Yc, B)
        except ZeroCrossCovariance:
            report.covariance_explained = None
        if head is not None:
            report.mse = mse(Y, predict_regression(head, Z))
    elif head is not None:
        prob = predict_proba(head, Z)
        report.logloss = logloss(response.values, prob)
        report.accuracy = accuracy(response.values, prob)
        try:
            report.auc = auc(response.values, prob)
        except OneClassOnly:
            report.auc = None
    return report


# ------------------------------------------------------- cross-validation

@dataclass
class CvReport:
    grid: list
    fold_scores: np.ndarray  # len(grid) x K
    avg_scores: np.ndarray
    best_kappa: float
    best_score: float
    seed: int
    folds: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def num(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "grid": [float(g) for g in self.grid],
            "fold_scores": [[num(s) for s in row] for row in self.fold_scores],
            "avg_scores": [num(s) for s in self.avg_scores],
            "best_kappa": float(self.best_kappa),
            "best_score": num(self.best_score),
            "seed": self.seed,
            "failures": self.failures,
        }


def make_folds(n: int, K: int, seed: int) -> list[np.ndarray]:
    """Shuffle 0..n-1 once with `seed` and cut into K near-equal contiguous folds."""
    if K < 2 or n < K:
        raise ValueError(f"eval.kfold_cv: need 2 <= K <= n, got K={K}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, K)


def projection_pipeline(fit_projection: Callable, task: str = "regression", l2: float = 1e-6):
    """Wrap ``fit_projection(X, Y, value) -> model`` into a CV fit function that
    adds an OLS (regression) or logistic (classification) head on the scores."""

    def fit_fn(X_tr, Y_tr, value):
        model = fit_projection(X_tr, Y_tr, value)
        Z_tr = core.transform(model, X_tr)
        if task == "classification":
            head = logistic_fit(Z_tr, Y_tr, l2=l2)
            return lambda X_val: predict_proba(head, core.transform(model, X_val))
        head = ols_fit(Z_tr, Y_tr)
        return lambda X_val: predict_regression(head, core.transform(model, X_val))

    return fit_fn


def cspca_pipeline(q: int, task: str = "regression", solver: core.SolverSpec = core.EXACT,
                   standardize: bool = False):
    return projection_pipeline(
        lambda X, Y, kappa: core.fit(X, Y, q, kappa, solver=solver, task=task,
                                     standardize=standardize),
        task=task)


def kfold_cv(X, response, grid: Sequence[float], q: int, K: int = 5, seed: int = 0,
             fit_fn: Optional[Callable] = None, score_fn: Optional[Callable] = None,
             task: Optional[str] = None, n_jobs: int = 1) -> CvReport:
    """K-fold cross-validation of a hyperparameter grid.

    ``fit_fn(X_train, Y_train, value)`` must return a predictor
    ``f(X_val) -> predictions``; it receives raw training rows and does its
    own centring, so held-out rows never influence the fit. The default
    fits CSPCA with `q` components and an OLS / logistic head. Scores are
    validation MSE (regression) or log-loss (classification); any
    package error in a fold scores +inf for that grid value.
    """
    X = linalg.as_matrix(X, "X")
    if isinstance(response, core.ResponseSet):
        task = response.task
        Y = response.values
    else:
        task = task or "regression"
        Y = core.as_response(response, task).values
    grid = list(grid)
    if not grid:
        raise ValueError("eval.kfold_cv: grid is empty")
    n = X.shape[0]
    if Y.shape[0] != n:
        raise DimensionMismatch(f"eval.kfold_cv: X has {n} rows, response has {Y.shape[0]}")
    if fit_fn is None:
        fit_fn = cspca_pipeline(q, task)
    if score_fn is None:
        score_fn = mse if task == "regression" else logloss

    folds = make_folds(n, K, seed)
    jobs = [(i, j) for i in range(len(grid)) for j in range(K)]

    def run(job):
        i, j = job
        val = folds[j]
        train = np.concatenate([folds[f] for f in range(K) if f != j])
        try:
            predictor = fit_fn(X[train], Y[train], grid[i])
            return float(score_fn(Y[val], predictor(X[val]))), None
        except (CSPCAError, np.linalg.LinAlgError) as exc:
            return np.inf, f"{type(exc).__name__}: {exc}"

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    scores = np.empty((len(grid), K))
    failures = []
    for (i, j), (score, err) in zip(jobs, results):
        scores[i, j] = score
        if err is not None:
            failures.append({"value": float(grid[i]), "fold": j, "error": err})
    with np.errstate(invalid="ignore"):
        avg = scores.mean(axis=1)
    avg = np.where(np.isnan(avg), np.inf, avg)
    best = float(avg.min())
    if not np.isfinite(best):
        raise CSPCAError("eval.kfold_cv: every grid value failed on some fold")
    best_value = min(g for g, a in zip(grid, avg) if a == best)
    return CvReport(grid, scores, avg, best_value, best, seed,
                    folds=[f.tolist() for f in folds], failures=failures)
