"""One-vs-rest linear SVM trained by stochastic subgradient descent.

Each class ``c`` gets a hyperplane minimising
``0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b))`` with ``y_i = +1``
for class ``c`` and ``-1`` otherwise. The bias is the weight of a constant
unit feature and is regularised with ``w``. Steps follow the ``1 / (lambda t)``
schedule with ``lambda = 1 / (C n)``; the candidate after each epoch is the
average of that epoch's iterates, and the model keeps the best candidate
seen so far by primal objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DataError, ShapeError

__all__ = ["LinearModel", "train_linear_svm", "predict", "predict_labels", "decision_function", "evaluate_accuracy", "svm_objective"]


@dataclass(frozen=True)
class LinearModel:
    classes: tuple
    weights: np.ndarray  # (K, dim)
    bias: np.ndarray  # (K,)
    C: float = 1.0
    epochs: int = 20
    seed: int = 0
    objective_history: tuple = field(default=(), compare=False)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LinearModel):
            return NotImplemented
        return (
            self.classes == other.classes
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.bias, other.bias)
            and (self.C, self.epochs, self.seed) == (other.C, other.epochs, other.seed)
        )

    __hash__ = None


def _as_csr(features) -> sp.csr_matrix:
    if sp.issparse(features):
        x = sp.csr_matrix(features, dtype=np.float64)
    else:
        arr = np.asarray(features, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[None]
        x = sp.csr_matrix(arr)
    x.sort_indices()
    return x


def svm_objective(w, b, x: sp.csr_matrix, y, C: float) -> float:
    margins = y * (x @ w + b)
    return 0.5 * (float(w @ w) + b * b) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def _train_binary(x: sp.csr_matrix, y: np.ndarray, C: float, epochs: int, rng: np.random.Generator):
    n, d = x.shape
    lam = 1.0 / (C * n)
    indptr, indices, data = x.indptr, x.indices, x.data
    # w = scale * v; the constant bias feature lives at index d
    v = np.zeros(d + 1)
    scale = 1.0
    t = 0
    best = None
    history = []
    for _ in range(epochs):
        total = np.zeros(d + 1)
        cum = 0.0  # running sum of scale within the epoch
        last = np.zeros(d + 1)  # value of cum when each coordinate was last flushed
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            lo, hi = indptr[i], indptr[i + 1]
            cols = indices[lo:hi]
            vals = data[lo:hi]
            margin = y[i] * scale * (vals @ v[cols] + v[d])
            shrink = 1.0 - eta * lam
            if shrink <= 0.0:  # first step: the regulariser wipes the iterate
                v[:] = 0.0
                scale = 1.0
            else:
                scale *= shrink
            if margin < 1.0:
                step = eta * y[i] / scale
                touched = np.append(cols, d)
                total[touched] += v[touched] * (cum - last[touched])
                last[touched] = cum
                v[cols] += step * vals
                v[d] += step
            cum += scale
            if scale < 1e-12:
                total += v * (cum - last)
                v *= scale
                scale = 1.0
                cum = 0.0
                last[:] = 0.0
        total += v * (cum - last)
        avg = total / n
        w, b = avg[:d], avg[d]
        obj = svm_objective(w, b, x, y, C)
        if best is None or obj < best[0]:
            best = (obj, w.copy(), float(b))
        history.append(best[0])
    return best[1], best[2], history


def train_linear_svm(features, labels, C: float = 1.0, epochs: int = 20, seed: int = 0) -> LinearModel:
    """Fit one binary hinge-loss classifier per class; deterministic given ``seed``.

    Raises
    ------
    DataError
        On empty data or fewer than two distinct labels.
    """
    x = _as_csr(features)
    labels = list(labels)
    if x.shape[0] == 0 or not labels:
        raise DataError("cannot train a classifier on empty data")
    if len(labels) != x.shape[0]:
        raise ShapeError(f"{x.shape[0]} feature rows but {len(labels)} labels")
    if C <= 0 or epochs < 1:
        raise ValueError("C must be positive and epochs at least 1")
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise DataError("a classifier needs at least two classes")
    index = {c: k for k, c in enumerate(classes)}
    y_all = np.array([index[l] for l in labels])
    weights = np.zeros((len(classes), x.shape[1]))
    bias = np.zeros(len(classes))
    histories = []
    for k in range(len(classes)):
        y = np.where(y_all == k, 1.0, -1.0)
        rng = np.random.default_rng([seed, k])
        w, b, hist = _train_binary(x, y, C, epochs, rng)
        weights[k] = w
        bias[k] = b
        histories.append(tuple(hist))
    return LinearModel(classes, weights, bias, float(C), int(epochs), int(seed), tuple(histories))


def decision_function(model: LinearModel, features) -> np.ndarray:
    x = _as_csr(features)
    if x.shape[1] != model.dim:
        raise ShapeError(f"feature dimension {x.shape[1]} does not match model dimension {model.dim}")
    return np.asarray(x @ model.weights.T) + model.bias


def predict_labels(model: LinearModel, features) -> list:
    """Predicted label for every row of ``features``."""
    winners = np.argmax(decision_function(model, features), axis=1)
    return [model.classes[k] for k in winners]


def predict(model: LinearModel, feature):
    """Label of the highest-scoring class ``argmax_c w_c . x + b_c``.

    Ties go to the lowest class index. ``feature`` is one vector (dense
    1-D or a ``1 x dim`` sparse row).
    """
    rows = feature.shape[0] if sp.issparse(feature) else (1 if np.ndim(feature) == 1 else len(feature))
    if rows != 1:
        raise ShapeError(f"predict takes one feature vector, got {rows} rows; use predict_labels")
    return predict_labels(model, feature)[0]


def evaluate_accuracy(model: LinearModel, features, labels) -> float:
    labels = list(labels)
    if not labels:
        raise DataError("cannot evaluate on an empty test set")
    predicted = predict_labels(model, features)
    if len(predicted) != len(labels):
        raise ShapeError(f"{len(predicted)} predictions for {len(labels)} labels")
    return sum(p == t for p, t in zip(predicted, labels)) / len(labels)
