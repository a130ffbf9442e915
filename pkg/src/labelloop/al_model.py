"""Binary logistic regression for the actively trained model and the end model.

Training is deterministic: zero initialization, full-batch gradient
descent with Armijo backtracking, mean logistic loss plus an L2 penalty
on the weights (bias unregularized). The same routine fits the
per-iteration model on pseudo-labels and the final downstream model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOGIT_CLIP = 30.0
ARMIJO_C = 1e-4
BACKTRACK_FACTOR = 0.5
MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray
    bias: float
    l2: float
    n_trained: int

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")

    @property
    def dim(self) -> int:
        return len(self.weights)


def zero_model(dim: int, l2: float = 1e-3) -> LogRegModel:
    """Untrained model: every prediction is uniform."""
    return LogRegModel(weights=np.zeros(dim), bias=0.0, l2=l2, n_trained=0)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # clip far outside the working range purely to avoid exp overflow
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def loss(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    """Mean logistic loss plus (l2/2)*||w||^2; bias unpenalized."""
    z = X @ w + b
    per_example = np.logaddexp(0.0, z) - y * z
    return float(per_example.mean() + 0.5 * l2 * (w @ w))


def gradient(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of `loss` with respect to (w, b)."""
    residual = _sigmoid(X @ w + b) - y
    grad_w = X.T @ residual / len(y) + l2 * w
    grad_b = float(residual.mean())
    return grad_w, grad_b


def fit(
    X: np.ndarray,
    y: np.ndarray,
    l2: float = 1e-3,
    max_iter: int = 500,
    tol: float = 1e-6,
) -> LogRegModel:
    """Train by full-batch descent with backtracking line search.

    Stops when the gradient norm over (w, b) drops below `tol` or after
    `max_iter` iterations. The line search enforces a non-increasing loss,
    so identical inputs always give bitwise-identical models.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    classes = np.unique(y)
    if not np.all(np.isin(classes, [0, 1])):
        raise ValueError("labels must be 0 or 1")
    if len(classes) < 2:
        raise ValueError("need examples of both classes to fit")

    w = np.zeros(X.shape[1])
    b = 0.0
    yf = y.astype(float)
    current = loss(X, yf, w, b, l2)
    for _ in range(max_iter):
        grad_w, grad_b = gradient(X, yf, w, b, l2)
        grad_sq = grad_w @ grad_w + grad_b * grad_b
        if np.sqrt(grad_sq) < tol:
            break
        step = 1.0
        for _ in range(MAX_BACKTRACKS):
            cand_loss = loss(X, yf, w - step * grad_w, b - step * grad_b, l2)
            if cand_loss <= current - ARMIJO_C * step * grad_sq:
                break
            step *= BACKTRACK_FACTOR
        else:
            break  # no productive step exists at float precision
        w = w - step * grad_w
        b = b - step * grad_b
        current = cand_loss
    return LogRegModel(weights=w, bias=float(b), l2=l2, n_trained=len(y))


def predict_proba(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    """Class probabilities per row, columns [P(0), P(1)]; rows sum to 1."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.dim:
        raise ValueError(f"feature dim {X.shape[1]} does not match model dim {model.dim}")
    z = np.clip(X @ model.weights + model.bias, -LOGIT_CLIP, LOGIT_CLIP)
    p1 = _sigmoid(z)
    return np.column_stack([1.0 - p1, p1])


def predict(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    """Hard argmax labels (ties resolve to class 0)."""
    return np.argmax(predict_proba(model, X), axis=1)


def confidence(soft_label: np.ndarray) -> float:
    """Top-1 probability of a soft label."""
    probs = np.asarray(soft_label, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("soft label must be a non-empty vector")
    return float(probs.max())
