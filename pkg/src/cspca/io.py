"""CSV datasets, JSON model files and report output."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .baselines import BaselineModel
from .core import ProjectionModel, ResponseSet, SolverSpec
from .errors import AmbiguousLabels, CorruptModel, MissingValue, ParseError, VersionMismatch
from .predict import LogisticHead, RegressionHead

FORMAT_VERSION = "1"
MISSING_TOKENS = {"", "na", "nan", "null", "none", "?"}
ORTHONORMAL_METHODS = {"pca", "hsic", "bair"}
ARRAY_PARAMS = {"weights", "loadings", "y_loadings", "coef"}

ColumnRef = Union[int, str]


@dataclass
class Dataset:
    X: np.ndarray
    response: Optional[ResponseSet]
    feature_names: list[str]
    response_columns: list[str]
    label_map: Optional[dict] = None  # original label text -> 0/1
    x_means: Optional[np.ndarray] = None
    x_scale: Optional[np.ndarray] = None


def _resolve(ref: ColumnRef, names: list[str], path) -> int:
    if isinstance(ref, (int, np.integer)):
        if not 0 <= ref < len(names):
            raise ParseError(f"io.load_csv: {path}: column index {ref} out of range")
        return int(ref)
    if ref in names:
        return names.index(ref)
    if isinstance(ref, str) and ref.lstrip("-").isdigit():
        return _resolve(int(ref), names, path)
    raise ParseError(f"io.load_csv: {path}: no column named {ref!r}")


def load_csv(path, response_cols: Optional[Sequence[ColumnRef]] = None, delimiter: str = ",",
             header: bool = True, standardize: bool = False, task: Optional[str] = None,
             ignore_cols: Sequence[ColumnRef] = ()) -> Dataset:
    """Read a numeric CSV into features and (optionally) responses.

    A single response column with exactly two distinct values is treated as
    binary labels (sorted order maps to 0, 1) unless `task` says otherwise.
    Rows are numbered from 1 after the header in error messages.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"io.load_csv: {path}: file is empty")
    if header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
    else:
        names = [f"x{j}" for j in range(len(rows[0]))]
        body = rows
    if not body:
        raise ParseError(f"io.load_csv: {path}: no data rows")
    width = len(names)
    resp_idx = [_resolve(r, names, path) for r in (response_cols or [])]
    skip = set(resp_idx) | {_resolve(r, names, path) for r in ignore_cols}
    feat_idx = [j for j in range(width) if j not in skip]

    raw = []
    for i, row in enumerate(body, start=1):
        if len(row) != width:
            raise ParseError(f"io.load_csv: {path}: row {i} has {len(row)} fields, expected {width}")
        raw.append([c.strip() for c in row])

    def numeric(i, j):
        cell = raw[i][j]
        if cell.lower() in MISSING_TOKENS:
            raise MissingValue(f"io.load_csv: {path}: missing value at row {i + 1}, column {names[j]!r}")
        try:
            val = float(cell)
        except ValueError:
            raise ParseError(f"io.load_csv: {path}: cannot parse {cell!r} at row {i + 1}, "
                             f"column {names[j]!r}") from None
        if not math.isfinite(val):
            raise MissingValue(f"io.load_csv: {path}: non-finite value at row {i + 1}, column {names[j]!r}")
        return val

    n = len(raw)
    X = np.array([[numeric(i, j) for j in feat_idx] for i in range(n)], dtype=float).reshape(n, len(feat_idx))

    response, label_map = None, None
    if resp_idx:
        response, label_map = _parse_response(raw, resp_idx, names, task, numeric, path)

    x_means = x_scale = None
    if standardize:
        x_means = X.mean(axis=0)
        x_scale = X.std(axis=0)
        x_scale[x_scale == 0] = 1.0
        X = (X - x_means) / x_scale
    return Dataset(X, response, [names[j] for j in feat_idx], [names[j] for j in resp_idx],
                   label_map, x_means, x_scale)


def _parse_response(raw, resp_idx, names, task, numeric, path):
    n = len(raw)
    if len(resp_idx) == 1 and task != "regression":
        j = resp_idx[0]
        for i in range(n):
            if raw[i][j].lower() in MISSING_TOKENS:
                raise MissingValue(f"io.load_csv: {path}: missing value at row {i + 1}, column {names[j]!r}")
        cells = [raw[i][j] for i in range(n)]
        try:
            keyed = {c: float(c) for c in cells}
        except ValueError:
            keyed = {c: c for c in cells}
        distinct = sorted(set(cells), key=lambda c: keyed[c])
        if len(distinct) == 2:
            label_map = {distinct[0]: 0, distinct[1]: 1}
            labels = np.array([label_map[c] for c in cells], dtype=float)
            return ResponseSet(labels, "classification"), label_map
        if task == "classification":
            raise AmbiguousLabels(f"io.load_csv: {path}: column {names[j]!r} has {len(distinct)} "
                                  "distinct values, classification needs exactly 2")
    Y = np.array([[numeric(i, j) for j in resp_idx] for i in range(n)], dtype=float)
    return ResponseSet(Y, "regression"), None


def save_csv(path, X, Y=None, feature_names: Optional[Sequence[str]] = None,
             response_names: Optional[Sequence[str]] = None) -> None:
    """Write features (and responses) with round-trip exact float text."""
    X = np.asarray(X, dtype=float)
    cols = list(feature_names) if feature_names is not None else [f"x{j + 1}" for j in range(X.shape[1])]
    data = X
    if Y is not None:
        Y = np.asarray(Y, dtype=float)
        Y = Y[:, None] if Y.ndim == 1 else Y
        cols += list(response_names) if response_names is not None else (
            ["y"] if Y.shape[1] == 1 else [f"y{j + 1}" for j in range(Y.shape[1])])
        data = np.column_stack([X, Y])
    write_matrix_csv(path, data, cols)


def write_matrix_csv(path, M, columns: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in np.asarray(M, dtype=float):
            w.writerow([repr(float(v)) for v in row])


def write_rows_csv(path, rows: list[dict], columns: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in r.items()})


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


# ------------------------------------------------------------ model files

@dataclass
class ModelFile:
    model: Union[ProjectionModel, BaselineModel]
    heads: dict = field(default_factory=dict)
    feature_names: Optional[list] = None
    response_columns: Optional[list] = None
    label_map: Optional[dict] = None


def _arr(a):
    return None if a is None else np.asarray(a, dtype=float).tolist()


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _head_to_dict(head) -> dict:
    if isinstance(head, RegressionHead):
        return {"type": "ols", "coefficients": _arr(head.coefficients),
                "intercept": _arr(head.intercept), "rank_deficient": head.rank_deficient}
    return {"type": "logistic", "coefficients": _arr(head.coefficients),
            "intercept": float(head.intercept), "converged": head.converged,
            "iterations": head.iterations, "l2": head.l2}


def _head_from_dict(d: dict):
    if d["type"] == "ols":
        return RegressionHead(np.array(d["coefficients"], dtype=float).reshape(-1, len(d["intercept"])),
                              np.array(d["intercept"], dtype=float), d.get("rank_deficient", False))
    if d["type"] == "logistic":
        return LogisticHead(np.array(d["coefficients"], dtype=float), float(d["intercept"]),
                            bool(d["converged"]), int(d["iterations"]), float(d.get("l2", 1e-6)))
    raise CorruptModel(f"io.load_model: unknown head type {d['type']!r}")


def model_to_dict(mf: ModelFile) -> dict:
    m = mf.model
    doc = {
        "format_version": FORMAT_VERSION,
        "method": m.method,
        "task": m.task,
        "q": int(m.q),
        "x_means": _arr(m.x_means),
        "x_scale": _arr(m.x_scale),
        "y_means": _arr(m.y_means),
        "W": _arr(m.W),
        "eigenvalues": _arr(m.eigenvalues),
        "params": _jsonable(m.params),
    }
    if isinstance(m, ProjectionModel):
        doc["kappa"] = float(m.kappa)
        doc["center_kernel"] = bool(m.center_kernel)
        doc["solver"] = {"kind": m.solver.kind, "m": m.solver.m, "seed": int(m.solver.seed),
                         "orthogonalize": bool(m.solver.orthogonalize)}
    doc["heads"] = {name: _head_to_dict(h) for name, h in mf.heads.items()}
    doc["feature_names"] = mf.feature_names
    doc["response_columns"] = mf.response_columns
    doc["label_map"] = mf.label_map
    return doc


def save_model(model, path, heads: Optional[dict] = None, **meta) -> None:
    mf = model if isinstance(model, ModelFile) else ModelFile(model, heads or {}, **meta)
    write_json(path, model_to_dict(mf))


def _validate(doc: dict) -> None:
    try:
        W = np.array(doc["W"], dtype=float)
        means = np.array(doc["x_means"], dtype=float)
        q = int(doc["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"io.load_model: malformed model payload ({exc})") from None
    if W.ndim != 2 or W.shape != (means.shape[0], q) or not np.all(np.isfinite(W)):
        raise CorruptModel(f"io.load_model: W of shape {W.shape} inconsistent with p={means.shape[0]}, q={q}")
    method = doc.get("method")
    if method == "cspca":
        if not float(doc.get("kappa", 0)) > 0:
            raise CorruptModel("io.load_model: kappa must be positive")
        solver = doc.get("solver", {})
        if solver.get("kind") == "nystrom" and not solver.get("orthogonalize"):
            if not np.allclose(np.linalg.norm(W, axis=0), 1.0, atol=1e-8, rtol=0):
                raise CorruptModel("io.load_model: Nystrom loadings are not unit norm")
            return
    if method == "cspca" or method in ORTHONORMAL_METHODS:
        err = np.max(np.abs(W.T @ W - np.eye(q)))
        if err > 1e-8:
            raise CorruptModel(f"io.load_model: loadings not orthonormal (max error {err:.2e})")


def model_from_dict(doc: dict) -> ModelFile:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"io.load_model: unsupported format_version {version!r}")
    _validate(doc)

    def opt(key):
        return None if doc.get(key) is None else np.array(doc[key], dtype=float)

    W = np.array(doc["W"], dtype=float)
    params = dict(doc.get("params") or {})
    for key in ARRAY_PARAMS & params.keys():
        params[key] = np.array(params[key], dtype=float)
    common = dict(W=W, x_means=opt("x_means"), q=int(doc["q"]), task=doc["task"],
                  y_means=opt("y_means"), eigenvalues=opt("eigenvalues"), x_scale=opt("x_scale"),
                  params=params)
    if doc["method"] == "cspca":
        s = doc["solver"]
        model = ProjectionModel(kappa=float(doc["kappa"]),
                                solver=SolverSpec(s["kind"], s.get("m"), int(s.get("seed", 0)),
                                                  bool(s.get("orthogonalize", False))),
                                center_kernel=bool(doc.get("center_kernel", False)), **common)
    else:
        model = BaselineModel(method=doc["method"], **common)
    heads = {name: _head_from_dict(h) for name, h in (doc.get("heads") or {}).items()}
    return ModelFile(model, heads, doc.get("feature_names"), doc.get("response_columns"),
                     doc.get("label_map"))


def load_model_file(path) -> ModelFile:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"io.load_model: {path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise CorruptModel(f"io.load_model: {path}: expected a JSON object")
    return model_from_dict(doc)


def load_model(path):
    return load_model_file(path).model
