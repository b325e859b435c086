"""Covariance-supervised PCA.

The projection maximises ``||W' X' Y||_F^2 + kappa ||X W||_F^2`` over
orthonormal ``W``. Writing the objective as ``tr(W' C W)`` with

    C = X' Y Y' X + kappa X' X          (regression)
    C = X' D X    + kappa X' X          (binary labels, D the delta kernel)

the optimum is the top-q eigenvectors of ``C``. For large ``p`` the
eigenvectors are approximated from ``m`` sampled columns of ``C``
(Nystrom extension), without forming ``C``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from . import linalg
from .errors import BadRank, DimensionMismatch, NonBinaryLabels, RankDeficient

Task = Literal["regression", "classification"]
NYSTROM_CUTOFF = 1e-10


@dataclass(frozen=True)
class ResponseSet:
    """Responses tagged by task: an n x k matrix, or n labels in {0, 1}."""

    values: np.ndarray
    task: Task = "regression"

    def __post_init__(self):
        if self.task == "classification":
            labels = np.asarray(self.values, dtype=float).ravel()
            check_binary(labels, op="ResponseSet")
            object.__setattr__(self, "values", labels)
        elif self.task == "regression":
            object.__setattr__(self, "values", linalg.as_matrix(self.values, "response"))
        else:
            raise ValueError(f"unknown task {self.task!r}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return 1 if self.task == "classification" else self.values.shape[1]


def as_response(response, task: Optional[Task] = None) -> ResponseSet:
    if isinstance(response, ResponseSet):
        return response
    return ResponseSet(np.asarray(response, dtype=float), task or "regression")


@dataclass(frozen=True)
class SolverSpec:
    kind: Literal["exact", "nystrom"] = "exact"
    m: Optional[int] = None  # None -> ceil(sqrt(p))
    seed: int = 0
    orthogonalize: bool = False

    def resolve_m(self, p: int) -> int:
        m = self.m if self.m is not None else math.ceil(math.sqrt(p))
        if not 1 <= m <= p:
            raise BadRank(f"cspca.SolverSpec: m={m} outside [1, {p}]")
        return m


EXACT = SolverSpec()


@dataclass(frozen=True)
class ProjectionModel:
    W: np.ndarray
    kappa: float
    q: int
    task: Task
    solver: SolverSpec
    x_means: np.ndarray
    y_means: Optional[np.ndarray]
    eigenvalues: np.ndarray
    x_scale: Optional[np.ndarray] = None
    center_kernel: bool = False
    method: str = "cspca"
    params: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.W.shape[0]

    def transform(self, X_new) -> np.ndarray:
        return transform(self, X_new)


def check_binary(labels: np.ndarray, op: str = "cspca") -> None:
    if labels.size == 0 or not np.all((labels == 0) | (labels == 1)):
        raise NonBinaryLabels(f"{op}: labels must take values in {{0, 1}}")


def delta_kernel(labels) -> np.ndarray:
    """n x n indicator of label equality."""
    labels = np.asarray(labels, dtype=float).ravel()
    check_binary(labels, op="cspca.delta_kernel")
    return (labels[:, None] == labels[None, :]).astype(float)


def _label_factor(labels: np.ndarray, center: bool) -> np.ndarray:
    # delta kernel = G G' with G the one-hot class indicator (n x 2)
    G = np.column_stack([labels == 0, labels == 1]).astype(float)
    if center:
        G = G - G.mean(axis=0)
    return G


def supervised_factor(response: ResponseSet, center_kernel: bool = False) -> np.ndarray:
    """Matrix F with ``F F'`` equal to the response kernel (Y Y' or delta)."""
    if response.task == "classification":
        return _label_factor(response.values, center_kernel)
    return response.values


def build_objective(Xc, response, kappa: float, center_kernel: bool = False) -> np.ndarray:
    """Dense p x p objective matrix for already-centred inputs."""
    Xc = linalg.as_matrix(Xc, "X")
    response = as_response(response)
    if kappa <= 0:
        raise ValueError(f"cspca.build_objective: kappa must be positive, got {kappa}")
    if response.n != Xc.shape[0]:
        raise DimensionMismatch(
            f"cspca.build_objective: X has {Xc.shape[0]} rows, response has {response.n}")
    B = Xc.T @ supervised_factor(response, center_kernel)
    C = B @ B.T + kappa * (Xc.T @ Xc)
    return 0.5 * (C + C.T)


def _preprocess(X, response: ResponseSet, standardize: bool):
    X = linalg.as_matrix(X, "X")
    if response.n != X.shape[0]:
        raise DimensionMismatch(f"cspca.fit: X has {X.shape[0]} rows, response has {response.n}")
    if X.shape[0] < 2:
        raise BadRank("cspca.fit: need at least 2 samples")
    Xc, x_means = linalg.center_columns(X)
    x_scale = None
    if standardize:
        x_scale = Xc.std(axis=0)
        x_scale[x_scale == 0] = 1.0
        Xc = Xc / x_scale
    if response.task == "regression":
        Yc, y_means = linalg.center_columns(response.values)
        response = ResponseSet(Yc, "regression")
    else:
        y_means = None
    return Xc, x_means, x_scale, response, y_means


def objective_columns(Xc: np.ndarray, F: np.ndarray, kappa: float) -> Callable[[np.ndarray], np.ndarray]:
    """Column oracle for C = Xc' F F' Xc + kappa Xc' Xc, O(n p) per column."""
    B = Xc.T @ F  # p x r

    def columns(idx):
        idx = np.asarray(idx, dtype=int)
        Xs = Xc[:, idx]
        return B @ B[idx].T + kappa * (Xc.T @ Xs)

    return columns


def nystrom_eigvecs(column_oracle, p: int, m: int, seed: int, q: int,
                    orthogonalize: bool = False, cutoff: float = NYSTROM_CUTOFF):
    """Approximate top eigenvectors of a p x p PSD matrix from m sampled columns.

    ``column_oracle(idx)`` must return the p x len(idx) block of columns.
    Returns ``(U, values, idx)``: unit-norm approximate eigenvectors (p x q),
    the matching eigenvalues of the sampled block, and the sampled indices.
    """
    if not 1 <= q <= m <= p:
        raise BadRank(f"cspca.nystrom_eigvecs: need 1 <= q <= m <= p, got q={q}, m={m}, p={p}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(p, size=m, replace=False))
    S = np.asarray(column_oracle(idx), dtype=float)
    if S.shape != (p, m):
        raise DimensionMismatch(f"cspca.nystrom_eigvecs: oracle returned {S.shape}, expected {(p, m)}")
    Cm = S[idx]
    values, Um = linalg.sym_eig(0.5 * (Cm + Cm.T))
    top = values[0]
    keep = values > cutoff * top if top > 0 else np.zeros_like(values, dtype=bool)
    if keep.sum() < q:
        raise RankDeficient(
            f"cspca.nystrom_eigvecs: only {int(keep.sum())} sampled eigenvalues survive "
            f"the cutoff, q={q} requested")
    values, Um = values[:q], Um[:, :q]
    U = S @ (Um / np.sqrt(values))
    if orthogonalize:
        U = linalg.orthonormal_basis(U)
    else:
        U = U / np.linalg.norm(U, axis=0)
    return linalg.fix_signs(U), values, idx


def fit(X, response, q: int, kappa: float = 1.0, solver: SolverSpec = EXACT,
        task: Optional[Task] = None, standardize: bool = False,
        center_kernel: bool = False) -> ProjectionModel:
    """Fit a CSPCA projection with `q` components."""
    response = as_response(response, task)
    if kappa <= 0:
        raise ValueError(f"cspca.fit: kappa must be positive, got {kappa}")
    Xc, x_means, x_scale, resp_c, y_means = _preprocess(X, response, standardize)
    p = Xc.shape[1]
    if not 1 <= q <= p:
        raise BadRank(f"cspca.fit: q={q} outside [1, {p}]")

    params = {}
    if solver.kind == "exact":
        C = build_objective(Xc, resp_c, kappa, center_kernel)
        values, W = linalg.sym_eig_topq(C, q)
    elif solver.kind == "nystrom":
        m = solver.resolve_m(p)
        oracle = objective_columns(Xc, supervised_factor(resp_c, center_kernel), kappa)
        W, values, idx = nystrom_eigvecs(oracle, p, m, solver.seed, q, solver.orthogonalize)
        solver = SolverSpec("nystrom", m, solver.seed, solver.orthogonalize)
        params["sampled_columns"] = idx.tolist()
    else:
        raise ValueError(f"cspca.fit: unknown solver {solver.kind!r}")

    return ProjectionModel(W=W, kappa=float(kappa), q=q, task=response.task, solver=solver,
                           x_means=x_means, y_means=y_means, eigenvalues=values,
                           x_scale=x_scale, center_kernel=center_kernel, params=params)


def transform(model, X_new) -> np.ndarray:
    """Project new rows: ``((X_new - means) / scale) @ W``."""
    X_new = linalg.as_matrix(X_new, "X_new")
    if X_new.shape[1] != model.W.shape[0]:
        raise DimensionMismatch(
            f"cspca.transform: X_new has {X_new.shape[1]} columns, model expects {model.W.shape[0]}")
    Xc = X_new - model.x_means
    if getattr(model, "x_scale", None) is not None:
        Xc = Xc / model.x_scale
    return Xc @ model.W
