"""Aggregating weak labels into per-instance soft labels.

Two aggregators: a majority-vote baseline and a one-coin Dawid-Skene
generative model fitted by EM. The one-coin model gives every label
function a single accuracy a_j = P(vote = y | active, y), spreads the
remaining mass (1 - a_j) evenly over the other C - 1 classes, and treats
abstains as missing at random.

Soft labels are plain length-C numpy probability vectors; abstain is
represented by None.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ABSTAIN, WeakLabelMatrix

ACCURACY_MIN = 0.01
ACCURACY_MAX = 0.99
INIT_ACCURACY = 0.7


@dataclass(frozen=True)
class GenerativeParams:
    class_prior: np.ndarray  # length C, sums to 1
    lf_accuracy: np.ndarray  # length m, each in [ACCURACY_MIN, ACCURACY_MAX]
    n_classes: int

    def __post_init__(self):
        object.__setattr__(self, "class_prior", np.asarray(self.class_prior, dtype=float))
        object.__setattr__(self, "lf_accuracy", np.asarray(self.lf_accuracy, dtype=float))
        if abs(self.class_prior.sum() - 1.0) > 1e-9:
            raise ValueError("class prior must sum to 1")
        if np.any(self.class_prior < 0):
            raise ValueError("class prior entries must be non-negative")
        if np.any(self.lf_accuracy < ACCURACY_MIN - 1e-12) or np.any(
            self.lf_accuracy > ACCURACY_MAX + 1e-12
        ):
            raise ValueError("LF accuracies must lie in the clamp interval")
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")

    @property
    def n_lfs(self) -> int:
        return len(self.lf_accuracy)


def majority_vote(row: np.ndarray, n_classes: int) -> np.ndarray | None:
    """Uniform soft label over the most-voted classes; None if all abstain."""
    row = np.asarray(row, dtype=int)
    active = row[row != ABSTAIN]
    if active.size == 0:
        return None
    counts = np.bincount(active, minlength=n_classes)
    top = counts == counts.max()
    probs = np.where(top, 1.0 / top.sum(), 0.0)
    return probs


def _entries(W) -> np.ndarray:
    if isinstance(W, WeakLabelMatrix):
        return W.entries
    return np.asarray(W, dtype=int)


def _check_entries(entries: np.ndarray, n_classes: int) -> None:
    bad = (entries != ABSTAIN) & ((entries < 0) | (entries >= n_classes))
    if np.any(bad):
        raise ValueError("weak labels must be -1 or a class index")


def _class_scores(entries: np.ndarray, params: GenerativeParams) -> np.ndarray:
    """Per-class log evidence from the active votes: shape (n, C).

    scores[i, y] = sum over active j of log a_j if W_ij == y
    else log((1 - a_j) / (C - 1)).
    """
    scores_cols = []
    log_a = np.log(params.lf_accuracy)
    log_err = np.log((1.0 - params.lf_accuracy) / (params.n_classes - 1))
    active = entries != ABSTAIN
    for y in range(params.n_classes):
        match = (entries == y) & active
        miss = active & ~match
        scores_cols.append(match @ log_a + miss @ log_err)
    return np.stack(scores_cols, axis=1)


def _posterior_from_scores(scores: np.ndarray, prior: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized posteriors and per-row log-evidence (logsumexp)."""
    with np.errstate(divide="ignore"):
        log_unnorm = scores + np.log(prior)[None, :]
    peak = log_unnorm.max(axis=1, keepdims=True)
    shifted = np.exp(log_unnorm - peak)
    total = shifted.sum(axis=1, keepdims=True)
    return shifted / total, (peak[:, 0] + np.log(total[:, 0]))


def posterior_matrix(params: GenerativeParams, entries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posteriors for every row at once.

    Returns (P, covered): P is n x C where uncovered (all-abstain) rows
    are filled with the uniform vector, and covered marks rows with at
    least one active vote. Callers that must abstain on uncovered rows
    check the mask; the sampler uses the uniform fill directly.
    """
    entries = np.atleast_2d(_entries(entries))
    if entries.shape[1] != params.n_lfs:
        raise ValueError(
            f"row width {entries.shape[1]} does not match {params.n_lfs} fitted LFs"
        )
    _check_entries(entries, params.n_classes)
    covered = np.any(entries != ABSTAIN, axis=1)
    if params.n_lfs == 0:
        return np.full((entries.shape[0], params.n_classes), 1.0 / params.n_classes), covered
    scores = _class_scores(entries, params)
    probs, _ = _posterior_from_scores(scores, params.class_prior)
    probs[~covered] = 1.0 / params.n_classes
    return probs, covered


def predict_generative(params: GenerativeParams, row: np.ndarray) -> np.ndarray | None:
    """Posterior over classes for one weak-label row; None if all abstain."""
    probs, covered = posterior_matrix(params, np.asarray(row, dtype=int)[None, :])
    return probs[0] if covered[0] else None


def lm_entropy_input(params: GenerativeParams, row: np.ndarray) -> np.ndarray:
    """Like predict_generative but uncovered rows map to the uniform vector.

    The sampler scores uncovered points as maximally uncertain for the
    label model, which steers queries toward coverage gaps.
    """
    probs, _ = posterior_matrix(params, np.asarray(row, dtype=int)[None, :])
    return probs[0]


def observed_log_likelihood(params: GenerativeParams, W) -> float:
    """Sum over rows of log sum_y prior(y) * prod(active vote terms)."""
    entries = _entries(W)
    if entries.shape[1] != params.n_lfs:
        raise ValueError("matrix width does not match params")
    if params.n_lfs == 0:
        return 0.0
    scores = _class_scores(entries, params)
    _, log_evidence = _posterior_from_scores(scores, params.class_prior)
    return float(log_evidence.sum())


def em_step(params: GenerativeParams, W) -> GenerativeParams:
    """One E+M update. Columns with no active entries keep their accuracy."""
    entries = _entries(W)
    active = entries != ABSTAIN
    scores = _class_scores(entries, params)
    q, _ = _posterior_from_scores(scores, params.class_prior)
    # q rows for uncovered instances equal the prior already (score 0 per class)

    active_counts = active.sum(axis=0).astype(float)
    agree_mass = np.zeros(params.n_lfs)
    for y in range(params.n_classes):
        match = ((entries == y) & active).astype(float)
        agree_mass += match.T @ q[:, y]
    with np.errstate(invalid="ignore", divide="ignore"):
        accuracy = np.where(active_counts > 0, agree_mass / active_counts, params.lf_accuracy)
    accuracy = np.clip(accuracy, ACCURACY_MIN, ACCURACY_MAX)
    prior = q.mean(axis=0)
    prior = prior / prior.sum()
    return GenerativeParams(class_prior=prior, lf_accuracy=accuracy, n_classes=params.n_classes)


def fit_generative(
    W,
    n_classes: int = 2,
    max_iter: int = 100,
    tol: float = 1e-6,
    seed: int | None = None,
) -> GenerativeParams:
    """Fit the one-coin model by EM.

    Initialization is deterministic (all accuracies 0.7, uniform prior);
    `seed` is accepted for interface stability but unused. Stops when the
    largest parameter change falls below `tol` or after `max_iter` steps.
    """
    del seed
    entries = _entries(W)
    if entries.ndim != 2:
        raise ValueError("weak-label matrix must be 2-D")
    _check_entries(entries, n_classes)
    if entries.shape[1] == 0 or not np.any(entries != ABSTAIN):
        raise ValueError("cannot fit a label model on an all-abstain matrix")
    m = entries.shape[1]
    params = GenerativeParams(
        class_prior=np.full(n_classes, 1.0 / n_classes),
        lf_accuracy=np.full(m, INIT_ACCURACY),
        n_classes=n_classes,
    )
    for _ in range(max_iter):
        new = em_step(params, entries)
        delta = max(
            np.abs(new.lf_accuracy - params.lf_accuracy).max(initial=0.0),
            np.abs(new.class_prior - params.class_prior).max(),
        )
        params = new
        if delta < tol:
            break
    return params
