"""Prediction heads fitted on projected scores: OLS and L2-penalised logistic
regression (IRLS)."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .core import check_binary
from .errors import DimensionMismatch


@dataclass(frozen=True)
class RegressionHead:
    coefficients: np.ndarray  # q x k
    intercept: np.ndarray  # k
    rank_deficient: bool = False


@dataclass(frozen=True)
class LogisticHead:
    coefficients: np.ndarray  # q
    intercept: float
    converged: bool
    iterations: int
    l2: float = 1e-6


def _augment(Z: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(Z.shape[0]), Z])


def ols_fit(Z, Y) -> RegressionHead:
    """Least squares with an explicit intercept column.

    Collinear scores fall back to the minimum-norm (pseudoinverse) solution
    and set ``rank_deficient``.
    """
    Z = linalg.as_matrix(Z, "Z")
    Y = linalg.as_matrix(Y, "Y")
    if Z.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"predict.ols_fit: Z has {Z.shape[0]} rows, Y has {Y.shape[0]}")
    A = _augment(Z)
    beta, _, rank, _ = np.linalg.lstsq(A, Y, rcond=None)
    return RegressionHead(beta[1:], beta[0], rank_deficient=bool(rank < A.shape[1]))


def predict_regression(head: RegressionHead, Z) -> np.ndarray:
    Z = linalg.as_matrix(Z, "Z")
    if Z.shape[1] != head.coefficients.shape[0]:
        raise DimensionMismatch(
            f"predict.predict_regression: Z has {Z.shape[1]} columns, head expects "
            f"{head.coefficients.shape[0]}")
    return Z @ head.coefficients + head.intercept


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _log1pexp(eta: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, eta)


def penalized_loglik(beta: np.ndarray, A: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Log-likelihood minus ``l2/2 * ||slopes||^2`` (intercept unpenalised)."""
    eta = A @ beta
    return float(y @ eta - _log1pexp(eta).sum() - 0.5 * l2 * beta[1:] @ beta[1:])


def penalized_gradient(beta, A, y, l2) -> np.ndarray:
    g = A.T @ (y - _sigmoid(A @ beta))
    g[1:] -= l2 * beta[1:]
    return g


def logistic_fit(Z, labels, l2: float = 1e-6, max_iter: int = 100, tol: float = 1e-8,
                 trace: list | None = None) -> LogisticHead:
    """Penalised logistic regression by Newton/IRLS with step halving.

    Stops when the parameter step has infinity-norm below `tol` or after
    `max_iter` iterations (``converged=False``). If `trace` is a list, the
    penalised log-likelihood after every accepted step is appended to it.
    """
    Z = linalg.as_matrix(Z, "Z")
    y = np.asarray(labels, dtype=float).ravel()
    check_binary(y, op="predict.logistic_fit")
    if y.shape[0] != Z.shape[0]:
        raise DimensionMismatch(f"predict.logistic_fit: Z has {Z.shape[0]} rows, labels {y.shape[0]}")
    A = _augment(Z)
    d = A.shape[1]
    penalty = l2 * np.eye(d)
    penalty[0, 0] = 0.0
    beta = np.zeros(d)
    ll = penalized_loglik(beta, A, y, l2)
    if trace is not None:
        trace.append(ll)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = _sigmoid(A @ beta)
        w = mu * (1.0 - mu)
        H = (A * w[:, None]).T @ A + penalty
        g = penalized_gradient(beta, A, y, l2)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        t = 1.0
        for _ in range(60):
            cand = beta + t * step
            ll_new = penalized_loglik(cand, A, y, l2)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            cand, ll_new = beta, ll
        delta = cand - beta
        beta, ll = cand, ll_new
        if trace is not None:
            trace.append(ll)
        if np.max(np.abs(delta)) < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"predict.logistic_fit: IRLS did not converge in {max_iter} iterations",
                      RuntimeWarning, stacklevel=2)
    return LogisticHead(beta[1:].copy(), float(beta[0]), converged, it, l2)


def predict_proba(head: LogisticHead, Z) -> np.ndarray:
    Z = linalg.as_matrix(Z, "Z")
    if Z.shape[1] != head.coefficients.shape[0]:
        raise DimensionMismatch(
            f"predict.predict_proba: Z has {Z.shape[1]} columns, head expects "
            f"{head.coefficients.shape[0]}")
    prob = _sigmoid(Z @ head.coefficients + head.intercept)
    # keep saturated values strictly inside (0, 1)
    return np.clip(prob, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
