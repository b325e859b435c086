"""Comparison methods: PCA, SPCA via HSIC, Bair's screening PCA, PLS2 and
binary LDA.

Every fitted baseline exposes ``W`` and ``x_means`` so it can be used with
``cspca.core.transform`` exactly like a CSPCA model.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import linalg
from .core import as_response, check_binary, delta_kernel, transform
from .errors import (
    BadRank,
    ConvergenceFailure,
    DimensionMismatch,
    NonBinaryLabels,
    SingularScatter,
    TooFewFeatures,
)

Method = Literal["pca", "hsic", "bair", "pls", "lda"]


@dataclass(frozen=True)
class BaselineModel:
    method: Method
    W: np.ndarray
    x_means: np.ndarray
    q: int
    task: str = "regression"
    y_means: Optional[np.ndarray] = None
    eigenvalues: Optional[np.ndarray] = None
    x_scale: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    def transform(self, X_new) -> np.ndarray:
        return transform(self, X_new)


def _check_q(q: int, p: int, op: str) -> None:
    if not 1 <= q <= p:
        raise BadRank(f"{op}: q={q} outside [1, {p}]")


def pca_fit(X, q: int) -> BaselineModel:
    Xc, means = linalg.center_columns(X)
    _check_q(q, Xc.shape[1], "baselines.pca_fit")
    values, W = linalg.sym_eig_topq(Xc.T @ Xc, q)
    return BaselineModel("pca", W, means, q, eigenvalues=values)


def rbf_kernel(Y, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError(f"baselines.rbf_kernel: sigma must be positive, got {sigma}")
    Y = linalg.as_matrix(Y, "Y")
    d2 = squareform(pdist(Y, "sqeuclidean"))
    return np.exp(-d2 / (2.0 * sigma**2))


def median_heuristic(Y) -> float:
    """Median pairwise distance between response rows (1.0 if all coincide)."""
    d = pdist(linalg.as_matrix(Y, "Y"))
    med = float(np.median(d)) if d.size else 0.0
    return med if med > 0 else 1.0


def hsic_spca_fit(X, response, q: int, kernel: str = "rbf", sigma: Optional[float] = None,
                  center_kernel: bool = False, task: Optional[str] = None) -> BaselineModel:
    """SPCA via HSIC: top-q eigenvectors of ``Xc' K Xc``.

    ``kernel`` is ``"rbf"`` (bandwidth ``sigma``, median heuristic when None)
    or ``"delta"`` for binary labels.
    """
    response = as_response(response, task)
    Xc, means = linalg.center_columns(X)
    n, p = Xc.shape
    if response.n != n:
        raise DimensionMismatch(f"baselines.hsic_spca_fit: X has {n} rows, response has {response.n}")
    _check_q(q, p, "baselines.hsic_spca_fit")
    params: dict = {"kernel": kernel, "center_kernel": center_kernel}
    if kernel == "delta":
        labels = np.asarray(response.values, dtype=float).ravel()
        try:
            check_binary(labels)
        except NonBinaryLabels:
            raise NonBinaryLabels("baselines.hsic_spca_fit: delta kernel needs binary labels") from None
        K = delta_kernel(labels)
    elif kernel == "rbf":
        Y = response.values if response.task == "regression" else response.values[:, None]
        sigma = median_heuristic(Y) if sigma is None else sigma
        params["sigma"] = float(sigma)
        K = rbf_kernel(Y, sigma)
    else:
        raise ValueError(f"baselines.hsic_spca_fit: unknown kernel {kernel!r}")
    if center_kernel:
        K = K - K.mean(axis=0) - K.mean(axis=1)[:, None] + K.mean()
    Q = Xc.T @ K @ Xc
    values, W = linalg.sym_eig_topq(0.5 * (Q + Q.T), q)
    scale = max(np.abs(values).max(), 0.0)
    params["degenerate"] = bool(scale <= 1e-12 * max(np.linalg.norm(Xc) ** 2, 1e-300))
    return BaselineModel("hsic", W, means, q, task=response.task, eigenvalues=values, params=params)


def bair_scores(Xc: np.ndarray, yc: np.ndarray) -> np.ndarray:
    """Standardised univariate coefficients ``x_j' y / ||x_j||`` per feature column."""
    norms = np.sqrt(np.einsum("ij,ij->j", Xc, Xc))
    raw = Xc.T @ yc
    out = np.zeros_like(raw)
    nz = norms > 0
    out[nz] = raw[nz] / norms[nz]
    return out


def bair_fit(X, y, theta: float, q: int) -> BaselineModel:
    y = np.asarray(y, dtype=float)
    if y.ndim == 2:
        if y.shape[1] != 1:
            raise DimensionMismatch("baselines.bair_fit: a single response column is required")
        y = y[:, 0]
    Xc, means = linalg.center_columns(X)
    if y.shape[0] != Xc.shape[0]:
        raise DimensionMismatch(f"baselines.bair_fit: X has {Xc.shape[0]} rows, y has {y.shape[0]}")
    beta = bair_scores(Xc, y - y.mean())
    kept = np.flatnonzero(np.abs(beta) > theta)
    if kept.size < q:
        raise TooFewFeatures(
            f"baselines.bair_fit: {kept.size} features pass theta={theta:g}, q={q} requested")
    Xk = Xc[:, kept]
    values, Wk = linalg.sym_eig_topq(Xk.T @ Xk, q)
    W = np.zeros((Xc.shape[1], q))
    W[kept] = Wk
    return BaselineModel("bair", W, means, q, eigenvalues=values,
                         params={"theta": float(theta), "kept": kept.tolist()})


def bair_cv_threshold(X, y, theta_grid, q: int, K: int = 5, seed: int = 0, n_jobs: int = 1):
    """Pick Bair's threshold by K-fold CV of an OLS head on the projected scores."""
    from .evaluation import kfold_cv, projection_pipeline

    fit_fn = projection_pipeline(lambda Xt, Yt, theta: bair_fit(Xt, Yt, theta, q))
    report = kfold_cv(X, y, theta_grid, q, K, seed, fit_fn=fit_fn, n_jobs=n_jobs)
    return report.best_kappa, report


def pls_fit(X, Y, q: int, max_iter: int = 500, tol: float = 1e-10) -> BaselineModel:
    """PLS2 by NIPALS with X deflation and regression-wise Y deflation.

    ``W`` holds the rotations ``R = weights (loadings' weights)^-1`` so that
    ``transform`` returns the latent scores.
    """
    X = linalg.as_matrix(X, "X")
    Y = linalg.as_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"baselines.pls_fit: X has {X.shape[0]} rows, Y has {Y.shape[0]}")
    Xr, x_means = linalg.center_columns(X)
    Yr, y_means = linalg.center_columns(Y)
    n, p = Xr.shape
    _check_q(q, min(p, n - 1) if n > 1 else 0, "baselines.pls_fit")
    k = Yr.shape[1]
    weights = np.zeros((p, q))
    loadings = np.zeros((p, q))
    y_loadings = np.zeros((k, q))
    iterations = []

    for a in range(q):
        u = Yr[:, [int(np.argmax(Yr.var(axis=0)))]]
        t_old = None
        for it in range(1, max_iter + 1):
            w = Xr.T @ u
            wn = np.linalg.norm(w)
            if wn == 0:
                raise BadRank(f"baselines.pls_fit: component {a + 1} has zero X'Y covariance")
            w /= wn
            t = Xr @ w
            c = Yr.T @ t / (t.T @ t)
            u = Yr @ c / (c.T @ c)
            if t_old is not None and np.linalg.norm(t - t_old) <= tol * np.linalg.norm(t):
                break
            t_old = t
            if k == 1:
                # single response: one pass is exact
                break
        else:
            raise ConvergenceFailure(f"baselines.pls_fit: component {a + 1} did not converge "
                                     f"in {max_iter} iterations")
        tt = float((t.T @ t)[0, 0])
        p_a = Xr.T @ t / tt
        Xr = Xr - t @ p_a.T
        Yr = Yr - t @ c.T
        weights[:, a] = w[:, 0]
        loadings[:, a] = p_a[:, 0]
        y_loadings[:, a] = c[:, 0]
        iterations.append(it)

    rotations = weights @ np.linalg.inv(loadings.T @ weights)
    coef = rotations @ y_loadings.T
    return BaselineModel("pls", rotations, x_means, q, y_means=y_means,
                         params={"weights": weights, "loadings": loadings,
                                 "y_loadings": y_loadings, "coef": coef,
                                 "iterations": iterations})


def pls_predict(model: BaselineModel, X_new) -> np.ndarray:
    X_new = linalg.as_matrix(X_new, "X_new")
    return (X_new - model.x_means) @ model.params["coef"] + model.y_means


def lda_fit(X, labels, ridge: Optional[float] = None) -> BaselineModel:
    """Binary Fisher discriminant ``(S_w + ridge I)^-1 (M_1 - M_0)``, unit norm.

    ``ridge=None`` uses ``1e-3 * trace(S_w) / p``.
    """
    X = linalg.as_matrix(X, "X")
    labels = np.asarray(labels, dtype=float).ravel()
    check_binary(labels, op="baselines.lda_fit")
    if labels.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"baselines.lda_fit: X has {X.shape[0]} rows, labels {labels.shape[0]}")
    X0, X1 = X[labels == 0], X[labels == 1]
    if len(X0) == 0 or len(X1) == 0:
        raise SingularScatter("baselines.lda_fit: both classes must be present")
    M0, M1 = X0.mean(axis=0), X1.mean(axis=0)
    D0, D1 = X0 - M0, X1 - M1
    Sw = D0.T @ D0 + D1.T @ D1
    p = X.shape[1]
    if ridge is None:
        ridge = 1e-3 * np.trace(Sw) / p
    A = Sw + ridge * np.eye(p)
    if ridge == 0 and np.linalg.matrix_rank(A) < p:
        raise SingularScatter("baselines.lda_fit: within-class scatter is singular; use ridge > 0")
    try:
        w = np.linalg.solve(A, M1 - M0)
    except np.linalg.LinAlgError as exc:
        raise SingularScatter(f"baselines.lda_fit: {exc}") from exc
    w = w / np.linalg.norm(w)
    return BaselineModel("lda", w[:, None], X.mean(axis=0), 1, task="classification",
                         params={"ridge": float(ridge)})
