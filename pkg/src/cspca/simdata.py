"""Simulated regression designs: Gaussian features (i.i.d. or Toeplitz/AR(1)
correlated) and three response generators.

Randomness comes from numpy's PCG64 generator (``np.random.default_rng``)
seeded explicitly, so outputs are pure functions of their arguments.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import toeplitz

from . import linalg

Design = Literal["iid", "toeplitz"]


@dataclass(frozen=True)
class SimSpec:
    n: int = 100
    p: int = 600
    design: Design = "iid"
    rho: float = 0.4
    dgp: int = 1
    noise_sd: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"SimSpec: n must be positive, got {self.n}")
        if self.p < 3:
            raise ValueError(f"SimSpec: p must be at least 3, got {self.p}")
        if self.design not in ("iid", "toeplitz"):
            raise ValueError(f"SimSpec: unknown design {self.design!r}")
        if self.design == "toeplitz" and not 0 < self.rho < 1:
            raise ValueError(f"SimSpec: rho must lie in (0, 1), got {self.rho}")
        if self.dgp not in (1, 2, 3):
            raise ValueError(f"SimSpec: dgp must be 1, 2 or 3, got {self.dgp}")
        if self.noise_sd < 0:
            raise ValueError(f"SimSpec: noise_sd must be non-negative, got {self.noise_sd}")


def toeplitz_cov(p: int, rho: float) -> np.ndarray:
    """``Sigma_ij = rho ** |i - j|``."""
    return toeplitz(rho ** np.arange(p))


def _streams(seed: int):
    # independent child streams for X and the noise
    ss = np.random.SeedSequence(seed)
    x_seq, eps_seq = ss.spawn(2)
    return np.random.default_rng(x_seq), np.random.default_rng(eps_seq)


def gen_design(spec: SimSpec) -> np.ndarray:
    rng, _ = _streams(spec.seed)
    Z = rng.standard_normal((spec.n, spec.p))
    if spec.design == "iid":
        return Z
    L = linalg.cholesky(toeplitz_cov(spec.p, spec.rho))
    return Z @ L.T


def response_mean(X, dgp: int) -> np.ndarray:
    X = linalg.as_matrix(X, "X")
    if X.shape[1] < 3:
        raise ValueError("simdata.gen_response: need at least 3 features")
    x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]
    if dgp == 1:
        return 3 * x1 - 5 * x2 + 4 * x3
    if dgp == 2:
        return np.exp(x1) + 3 * np.sin(x2) - 4 * x3
    if dgp == 3:
        return 2 * x1 - 0.5 * x1**2 + 3 * x2 + 4 * np.exp(x3 + 1)
    raise ValueError(f"simdata.gen_response: unknown dgp {dgp}")


def gen_response(X, dgp: int, noise_sd: float = 0.1, seed: int = 0) -> np.ndarray:
    """n x 1 response from one of the three generators plus N(0, noise_sd^2) noise."""
    mean = response_mean(X, dgp)
    _, rng = _streams(seed)
    eps = rng.standard_normal(mean.shape[0]) * noise_sd
    return (mean + eps)[:, None]


def simulate(spec: SimSpec) -> tuple[np.ndarray, np.ndarray]:
    X = gen_design(spec)
    return X, gen_response(X, spec.dgp, spec.noise_sd, spec.seed)


def train_test_split(n: int, test_frac: float = 0.2, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random split; the test set has ``round(n * test_frac)`` indices (halves round up)."""
    if not 0 < test_frac < 1:
        raise ValueError(f"simdata.train_test_split: test_frac must lie in (0, 1), got {test_frac}")
    n_test = int(np.floor(n * test_frac + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])
