"""QUBO construction from kernel matrices, the offset, and the classifier.

Two builders are shipped.  ``build_qubo_paper`` writes only off-diagonal
entries, each -1/2 * (y_n y_m + K[m][n]) * y_m y_n, leaving the diagonal
empty.  ``build_qubo_dual`` encodes the standard soft-margin dual over
binary weights, so that minimizing the energy maximizes
sum(alpha) - 1/2 (alpha y)^T K (alpha y).

The trained classifier is sign(sum_m alpha_m y_m K(x_m, x) + beta) with
ties at exactly zero resolved to +1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datagen import Dataset
from .kernels import Kernel, kernel_cross, kernel_from_dict, kernel_to_dict
from .qkernel import GramMatrix

MODEL_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class QuboMatrix:
    """Coefficient matrix q with energy E(alpha) = sum_ij q[i][j] a_i a_j
    over binary assignments."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"coefficient matrix must be square, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("coefficient matrix must be finite")

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass
class TrainedModel:
    """Binary weights, offset, stored training data and kernel config."""

    alpha: np.ndarray
    beta: float
    train_points: np.ndarray
    train_labels: np.ndarray
    kernel: Kernel
    builder: str = "paper"

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=int)
        self.train_points = np.atleast_2d(np.asarray(self.train_points, dtype=float))
        self.train_labels = np.asarray(self.train_labels, dtype=int)
        if self.alpha.shape[0] != self.train_points.shape[0]:
            raise ValueError("alpha length must equal the training set size")
        if not np.isfinite(self.beta):
            raise ValueError("beta must be finite")


def _entries(gram) -> np.ndarray:
    if isinstance(gram, GramMatrix):
        return gram.entries
    return np.asarray(gram, dtype=float)


def _check_sizes(k: np.ndarray, labels: np.ndarray) -> None:
    if k.shape[0] != k.shape[1]:
        raise ValueError(f"kernel matrix must be square, got shape {k.shape}")
    if labels.shape != (k.shape[0],):
        raise ValueError(
            f"label count {labels.shape} does not match kernel size {k.shape[0]}"
        )


def build_qubo_paper(gram, labels, slack_c: float = 0.0) -> QuboMatrix:
    """Pairwise QUBO: q[m][n] = -1/2 (y_n y_m + K[m][n]) y_m y_n for m != n.

    The diagonal stays zero.  ``slack_c`` is accepted for interface
    symmetry with the dual builder but has no effect here; this form has
    no slack term.
    """
    k = _entries(gram)
    labels = np.asarray(labels, dtype=float)
    _check_sizes(k, labels)
    n = len(labels)
    q = np.zeros((n, n))
    # Explicit loop: the add-then-multiply order per entry is part of the
    # contract (worked examples assert exact floats).
    for nn in range(n):
        for mm in range(n):
            if mm != nn:
                kernel_tot = labels[nn] * labels[mm] + k[mm, nn]
                q[mm, nn] = -0.5 * kernel_tot * labels[mm] * labels[nn]
    return QuboMatrix(q)


def build_qubo_dual(gram, labels, slack_c: float = 0.0) -> QuboMatrix:
    """Standard dual objective as a QUBO over binary weights.

    Off-diagonal entries are y_m y_n K[m][n] / 2; the diagonal carries
    K[n][n]/2 - 1 (the linear -sum(alpha) term) plus the optional slack
    penalty ``slack_c``.
    """
    k = _entries(gram)
    labels = np.asarray(labels, dtype=float)
    _check_sizes(k, labels)
    q = 0.5 * np.outer(labels, labels) * k
    np.fill_diagonal(q, 0.5 * np.diag(k) - 1.0 + slack_c)
    return QuboMatrix(q)


def compute_beta(alpha, labels, gram) -> float:
    """Offset beta = mean_n(y_n - sum_m alpha_m y_m K[m][n]).

    The inner sum runs over all m, including m = n.
    """
    k = _entries(gram)
    alpha = np.asarray(alpha, dtype=float)
    labels = np.asarray(labels, dtype=float)
    _check_sizes(k, labels)
    if alpha.shape != labels.shape:
        raise ValueError(f"alpha shape {alpha.shape} does not match labels {labels.shape}")
    return float(np.mean(labels - k.T @ (alpha * labels)))


def decision_values(xs, model: TrainedModel) -> np.ndarray:
    """Decision function for a batch of query points."""
    cross = kernel_cross(model.kernel, model.train_points, xs)
    return (model.alpha * model.train_labels) @ cross + model.beta


def decision_value(x, model: TrainedModel) -> float:
    """sum_m alpha_m y_m K(x_m, x) + beta for one query point."""
    return float(decision_values(np.atleast_2d(np.asarray(x, dtype=float)), model)[0])


def classify(x, model: TrainedModel) -> int:
    """Label of the query point; a decision value of exactly 0 maps to +1."""
    return 1 if decision_value(x, model) >= 0.0 else -1


def accuracy(model: TrainedModel, ds: Dataset) -> float:
    """Fraction of dataset points classified to their stored label."""
    if ds.m == 0:
        raise ValueError("cannot score an empty dataset")
    predicted = np.where(decision_values(ds.points, model) >= 0.0, 1, -1)
    return float(np.mean(predicted == ds.labels))


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "alpha": [int(a) for a in model.alpha],
        "beta": model.beta,
        "train_points": [[float(v) for v in row] for row in model.train_points],
        "train_labels": [int(v) for v in model.train_labels],
        "kernel": kernel_to_dict(model.kernel),
        "builder": model.builder,
    }


def model_from_dict(data: dict) -> TrainedModel:
    try:
        return TrainedModel(
            alpha=np.asarray(data["alpha"], dtype=int),
            beta=float(data["beta"]),
            train_points=np.asarray(data["train_points"], dtype=float),
            train_labels=np.asarray(data["train_labels"], dtype=int),
            kernel=kernel_from_dict(data["kernel"]),
            builder=str(data.get("builder", "paper")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"invalid model data: {exc}") from exc


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(path) -> TrainedModel:
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return model_from_dict(data)
