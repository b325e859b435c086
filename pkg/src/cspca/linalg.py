"""Dense linear-algebra primitives: centering, eigendecomposition, SVD,
pseudoinverse and Cholesky.

All routines are thin, validated wrappers around LAPACK via numpy, so
results are deterministic for identical inputs.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import (
    BadRank,
    ConvergenceFailure,
    DimensionMismatch,
    NotPositiveDefinite,
    NotSymmetric,
)

SYMMETRY_RTOL = 1e-8


class EigenPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a finite, non-empty 2-D float array (1-D becomes a column)."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name}: expected a 2-D array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name}: empty matrix of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or infinite entries")
    return arr


def center_columns(M) -> tuple[np.ndarray, np.ndarray]:
    M = as_matrix(M)
    means = M.mean(axis=0)
    return M - means, means


def fix_signs(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip each column so that its first non-negligible entry is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        scale = np.max(np.abs(col)) if col.size else 0.0
        if scale == 0.0:
            continue
        nz = np.flatnonzero(np.abs(col) > tol * scale)
        if col[nz[0]] < 0:
            vectors[:, j] = -col
    return vectors


def check_symmetric(A: np.ndarray, rtol: float = SYMMETRY_RTOL, op: str = "linalg") -> np.ndarray:
    if A.shape[0] != A.shape[1]:
        raise NotSymmetric(f"{op}: matrix of shape {A.shape} is not square")
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    asym = np.max(np.abs(A - A.T))
    if asym > rtol * scale:
        raise NotSymmetric(f"{op}: asymmetry {asym:.3e} exceeds {rtol:g} relative")
    return 0.5 * (A + A.T)


def sym_eig(A) -> EigenPairs:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending."""
    A = check_symmetric(as_matrix(A), op="linalg.sym_eig")
    try:
        values, vectors = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"linalg.sym_eig: {exc}") from exc
    order = np.argsort(-values, kind="stable")
    return EigenPairs(values[order], fix_signs(vectors[:, order]))


def sym_eig_topq(A, q: int) -> EigenPairs:
    """The `q` largest eigenpairs of symmetric `A`.

    Eigenvectors are orthonormal and sign-normalised (first nonzero entry
    positive). Tied eigenvalues yield an arbitrary orthonormal basis of the
    eigenspace.
    """
    A = as_matrix(A)
    if not 1 <= q <= A.shape[0]:
        raise BadRank(f"linalg.sym_eig_topq: q={q} outside [1, {A.shape[0]}]")
    full = sym_eig(A)
    return EigenPairs(full.values[:q].copy(), full.vectors[:, :q].copy())


def svd(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``A = U diag(s) Vt`` with singular values descending."""
    A = as_matrix(A)
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"linalg.svd: {exc}") from exc


def pinv(A, rank_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues at or below ``rank_tol * max_eigenvalue`` are treated as zero.
    """
    values, vectors = sym_eig(A)
    top = values[0] if values.size else 0.0
    if top <= 0:
        return np.zeros_like(vectors)
    keep = values > rank_tol * top
    V = vectors[:, keep]
    return (V / values[keep]) @ V.T


def cholesky(A) -> np.ndarray:
    A = check_symmetric(as_matrix(A), op="linalg.cholesky")
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"linalg.cholesky: {exc}") from exc


def principal_angles(A, B) -> np.ndarray:
    """Principal angles (radians, ascending) between the column spans of A and B."""
    Qa, _ = np.linalg.qr(as_matrix(A))
    Qb, _ = np.linalg.qr(as_matrix(B))
    s = np.linalg.svd(Qa.T @ Qb, compute_uv=False)
    s = np.clip(s, -1.0, 1.0)
    # arcsin of the residual is accurate for tiny angles where arccos is not
    resid = Qb - Qa @ (Qa.T @ Qb)
    r = np.linalg.svd(resid, compute_uv=False)
    small = np.sort(np.arcsin(np.clip(r, 0.0, 1.0)))
    large = np.sort(np.arccos(s))
    return np.where(large < 1e-2, small[: large.size], large)


def orthonormal_basis(W) -> np.ndarray:
    """Orthonormal basis (thin QR) for the column span of W."""
    Q, R = np.linalg.qr(as_matrix(W))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs
