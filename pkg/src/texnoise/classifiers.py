"""Four self-contained classifiers behind a uniform train/predict contract.

KNN and Gaussian naive Bayes consume features as-is; softmax regression and
the MLP standardize per dimension with statistics from the training set only.
Every tie (nearest-neighbor distance, vote, argmax) breaks toward the lower
class label so training and prediction are fully deterministic; gradient
training is full-batch descent with Armijo backtracking, bit-for-bit
reproducible for a given config, data, and seed.

Computations run in the dtype of the input features (the harness feeds
float32 for speed; tests use float64).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

_ARMIJO_C = 1e-4
_MAX_HALVINGS = 40
_STALL_REL = 1e-12
_MAX_STALLS = 3


@dataclass(frozen=True, eq=False)
class LabeledFeatures:
    """Feature matrix (n, d) with integer class labels (n,)."""

    features: np.ndarray
    labels: np.ndarray
    class_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        X = np.asarray(self.features)
        if X.dtype not in (np.float32, np.float64):
            X = X.astype(np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("labels must be 1-D and match the feature rows")
        if y.size and y.min() < 0:
            raise ValueError("labels must be non-negative")
        if not np.isfinite(X).all():
            raise ValueError("features must be finite")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: Sequence[int]) -> "LabeledFeatures":
        idx = np.asarray(indices, dtype=np.intp)
        return LabeledFeatures(self.features[idx], self.labels[idx], self.class_names)


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class GnbConfig:
    var_smoothing: float = 1e-9

    def __post_init__(self):
        if self.var_smoothing <= 0:
            raise ValueError("var_smoothing must be > 0")


@dataclass(frozen=True)
class LogRegConfig:
    l2: float = 1.0
    learning_rate: float = 1.0  # initial backtracking step
    max_iters: int = 5000
    tol: float = 1e-6

    def __post_init__(self):
        if self.l2 < 0 or self.learning_rate <= 0 or self.max_iters < 1 or self.tol <= 0:
            raise ValueError("invalid logistic regression config")


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 100
    epochs: int = 200
    learning_rate: float = 1.0  # initial backtracking step
    seed: int = 0

    def __post_init__(self):
        if self.hidden < 1 or self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("invalid MLP config")


ClassifierConfig = Union[KnnConfig, GnbConfig, LogRegConfig, MlpConfig]


def config_kind(config: ClassifierConfig) -> str:
    return {
        KnnConfig: "knn",
        GnbConfig: "gnb",
        LogRegConfig: "logreg",
        MlpConfig: "mlp",
    }[type(config)]


class Standardizer:
    """Per-dimension standardization fitted on training data.

    Dimensions that are identically zero in training (histogram codes that
    never occur) carry no information and are dropped; near-zero variances
    keep scale 1 instead of being floored, so a code seen only at test time
    cannot be amplified into a huge activation.
    """

    def fit(self, X: np.ndarray) -> "Standardizer":
        self.active = np.flatnonzero((X != 0).any(axis=0))
        Xa = X[:, self.active]
        self.mean = Xa.mean(axis=0)
        var = Xa.var(axis=0)
        self.scale = np.where(var > 1e-12, np.sqrt(var), np.asarray(1.0, X.dtype))
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X[:, self.active] - self.mean) / self.scale


def _class_index(labels: np.ndarray, classes: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(classes, labels)
    if (idx >= classes.size).any() or (classes[idx] != labels).any():
        raise ValueError("labels outside the trained class set")
    return idx


def _one_hot(y_idx: np.ndarray, n_classes: int, dtype) -> np.ndarray:
    out = np.zeros((y_idx.size, n_classes), dtype=dtype)
    out[np.arange(y_idx.size), y_idx] = 1
    return out


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def logreg_objective(W, b, X, y_onehot, l2):
    """Mean cross-entropy + l2/(2n)*||W||^2 and its analytic gradient."""
    n = X.shape[0]
    logits = X @ W + b
    log_probs = _log_softmax(logits)
    loss = -float((y_onehot * log_probs).sum(dtype=np.float64)) / n
    loss += 0.5 * l2 / n * float((W * W).sum(dtype=np.float64))
    G = (np.exp(log_probs) - y_onehot) / n
    dW = X.T @ G + (l2 / n) * W
    db = G.sum(axis=0)
    return loss, dW, db


def mlp_objective(params, X, y_onehot):
    """Mean cross-entropy of the one-hidden-layer rectifier MLP + gradients."""
    W1, b1, W2, b2 = params
    n = X.shape[0]
    Z1 = X @ W1 + b1
    A1 = np.maximum(Z1, 0)
    logits = A1 @ W2 + b2
    log_probs = _log_softmax(logits)
    loss = -float((y_onehot * log_probs).sum(dtype=np.float64)) / n
    G = (np.exp(log_probs) - y_onehot) / n
    dW2 = A1.T @ G
    db2 = G.sum(axis=0)
    dZ1 = (G @ W2.T) * (Z1 > 0)
    dW1 = X.T @ dZ1
    db1 = dZ1.sum(axis=0)
    return loss, (dW1, db1, dW2, db2)


def _armijo_descend(params, grads, loss0, loss_of, step0):
    """One backtracking descent step; returns (new params, loss, step) or None."""
    g2 = sum(float((g * g).sum(dtype=np.float64)) for g in grads)
    if g2 == 0.0:
        return None
    step = step0
    for _ in range(_MAX_HALVINGS):
        cand = [p - step * g for p, g in zip(params, grads)]
        loss = loss_of(cand)
        if loss <= loss0 - _ARMIJO_C * step * g2:
            return cand, loss, step
        step *= 0.5
    return None


class KNearestNeighbors:
    """Lazy learner: stores training data verbatim, votes over the k nearest."""

    def __init__(self, config: KnnConfig):
        self.config = config

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KNearestNeighbors":
        self.input_dim = X.shape[1]
        self.classes = np.unique(y)
        self.train_features = X
        self.train_labels = y
        self._train_idx = _class_index(y, self.classes)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        k = min(self.config.k, self.train_features.shape[0])
        out = np.empty(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            # Squared euclidean distance; accumulate in float64 so ordering
            # is stable for float32 features.
            d2 = ((self.train_features - X[i]) ** 2).sum(axis=1, dtype=np.float64)
            order = np.lexsort((self._train_idx, d2))
            votes = np.bincount(self._train_idx[order[:k]], minlength=self.classes.size)
            out[i] = self.classes[int(np.argmax(votes))]
        return out


class GaussianNaiveBayes:
    """Gaussian naive Bayes with variance smoothing, scored in log space."""

    def __init__(self, config: GnbConfig):
        self.config = config

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNaiveBayes":
        self.input_dim = X.shape[1]
        self.classes = np.unique(y)
        idx = _class_index(y, self.classes)
        n, d = X.shape
        C = self.classes.size
        self.means = np.empty((C, d), dtype=X.dtype)
        self.variances = np.empty((C, d), dtype=X.dtype)
        self.log_priors = np.empty(C)
        max_var = float(X.var(axis=0).max()) if d else 0.0
        eps = self.config.var_smoothing * max_var
        if eps == 0.0:
            eps = self.config.var_smoothing
        for c in range(C):
            rows = X[idx == c]
            self.means[c] = rows.mean(axis=0)
            self.variances[c] = rows.var(axis=0) + eps
            self.log_priors[c] = math.log(rows.shape[0] / n)
        return self

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        scores = np.empty((X.shape[0], self.classes.size))
        for c in range(self.classes.size):
            var = self.variances[c].astype(np.float64)
            diff = (X - self.means[c]).astype(np.float64)
            ll = -0.5 * (np.log(2.0 * np.pi * var) + diff * diff / var).sum(axis=1)
            scores[:, c] = self.log_priors[c] + ll
        return scores

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.log_joint(X), axis=1)]


class SoftmaxRegression:
    """Multinomial logistic regression, full-batch descent with backtracking."""

    def __init__(self, config: LogRegConfig):
        self.config = config

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SoftmaxRegression":
        cfg = self.config
        self.input_dim = X.shape[1]
        self.classes = np.unique(y)
        self.scaler = Standardizer().fit(X)
        Xs = self.scaler.transform(X)
        y_idx = _class_index(y, self.classes)
        Y = _one_hot(y_idx, self.classes.size, Xs.dtype)
        d, C = Xs.shape[1], self.classes.size
        W = np.zeros((d, C), dtype=Xs.dtype)
        b = np.zeros(C, dtype=Xs.dtype)
        n = Xs.shape[0]

        def loss_of(params):
            Wc, bc = params
            log_probs = _log_softmax(Xs @ Wc + bc)
            loss = -float((Y * log_probs).sum(dtype=np.float64)) / n
            return loss + 0.5 * cfg.l2 / n * float((Wc * Wc).sum(dtype=np.float64))

        stalls = 0
        step0 = cfg.learning_rate
        loss, dW, db = logreg_objective(W, b, Xs, Y, cfg.l2)
        for _ in range(cfg.max_iters):
            if max(float(np.abs(dW).max()), float(np.abs(db).max())) <= cfg.tol:
                break
            result = _armijo_descend([W, b], [dW, db], loss, loss_of, step0)
            if result is None:
                break
            (W, b), new_loss, accepted = result
            # Warm-start the next backtracking search near the accepted step.
            step0 = min(cfg.learning_rate, 2.0 * accepted)
            stalls = stalls + 1 if loss - new_loss <= _STALL_REL * max(1.0, abs(loss)) else 0
            loss = new_loss
            if stalls >= _MAX_STALLS:
                break
            _, dW, db = logreg_objective(W, b, Xs, Y, cfg.l2)
        self.weights, self.bias = W, b
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return self.scaler.transform(X) @ self.weights + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.decision_scores(X), axis=1)]


class MultilayerPerceptron:
    """One rectifier hidden layer, softmax output, seeded uniform init."""

    def __init__(self, config: MlpConfig):
        self.config = config

    def fit(self, X: np.ndarray, y: np.ndarray) -> "MultilayerPerceptron":
        cfg = self.config
        self.input_dim = X.shape[1]
        self.classes = np.unique(y)
        self.scaler = Standardizer().fit(X)
        Xs = self.scaler.transform(X)
        y_idx = _class_index(y, self.classes)
        Y = _one_hot(y_idx, self.classes.size, Xs.dtype)
        d, H, C = Xs.shape[1], cfg.hidden, self.classes.size

        rng = np.random.Generator(np.random.Philox(cfg.seed))
        s1 = 1.0 / math.sqrt(max(d, 1))
        s2 = 1.0 / math.sqrt(H)
        params = [
            rng.uniform(-s1, s1, (d, H)).astype(Xs.dtype),
            np.zeros(H, dtype=Xs.dtype),
            rng.uniform(-s2, s2, (H, C)).astype(Xs.dtype),
            np.zeros(C, dtype=Xs.dtype),
        ]

        def loss_of(cand):
            W1, b1, W2, b2 = cand
            A1 = np.maximum(Xs @ W1 + b1, 0)
            log_probs = _log_softmax(A1 @ W2 + b2)
            return -float((Y * log_probs).sum(dtype=np.float64)) / Xs.shape[0]

        step0 = cfg.learning_rate
        for _ in range(cfg.epochs):
            loss, grads = mlp_objective(params, Xs, Y)
            result = _armijo_descend(params, grads, loss, loss_of, step0)
            if result is None:
                break
            params, _, accepted = result
            step0 = min(cfg.learning_rate, 2.0 * accepted)
        self.params = tuple(params)
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        W1, b1, W2, b2 = self.params
        A1 = np.maximum(self.scaler.transform(X) @ W1 + b1, 0)
        return A1 @ W2 + b2

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.decision_scores(X), axis=1)]


_MODEL_TYPES = {
    KnnConfig: KNearestNeighbors,
    GnbConfig: GaussianNaiveBayes,
    LogRegConfig: SoftmaxRegression,
    MlpConfig: MultilayerPerceptron,
}

TrainedModel = Union[
    KNearestNeighbors, GaussianNaiveBayes, SoftmaxRegression, MultilayerPerceptron
]


def train(config: ClassifierConfig, data: LabeledFeatures) -> TrainedModel:
    """Train the classifier described by `config`; deterministic throughout."""
    if data.dimension == 0:
        raise ValueError("features must have dimension > 0")
    if np.unique(data.labels).size < 2:
        raise ValueError("training data must contain at least 2 classes")
    model = _MODEL_TYPES[type(config)](config)
    return model.fit(data.features, data.labels)


def predict(model: TrainedModel, vectors: np.ndarray) -> np.ndarray:
    """Predict one label per row of `vectors`."""
    X = np.asarray(vectors)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValueError(
            f"feature dimension mismatch: model expects {model.input_dim}, "
            f"got {X.shape[1] if X.ndim == 2 else X.ndim}-D input"
        )
    return model.predict(X)


def evaluate(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of exact label matches."""
    p = np.asarray(predicted)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError("predicted and truth must be equal-length 1-D sequences")
    if p.size == 0:
        raise ValueError("cannot evaluate empty label sequences")
    return float((p == t).mean())
