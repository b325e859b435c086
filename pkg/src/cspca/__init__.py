"""Covariance-supervised PCA with exact and Nystrom solvers, baselines,
metrics, cross-validation and a simulation harness."""
from .core import (
    ProjectionModel,
    ResponseSet,
    SolverSpec,
    build_objective,
    delta_kernel,
    fit,
    nystrom_eigvecs,
    transform,
)
from .errors import CSPCAError

__version__ = "0.1.0"

__all__ = [
    "CSPCAError",
    "ProjectionModel",
    "ResponseSet",
    "SolverSpec",
    "build_objective",
    "delta_kernel",
    "fit",
    "nystrom_eigvecs",
    "transform",
]
