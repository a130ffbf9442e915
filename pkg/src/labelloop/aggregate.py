"""Confidence-gated combination of the two predictors, plus threshold tuning.

Per instance: adopt the actively trained model's soft label when its
top-1 confidence clears the threshold tau; otherwise fall back to the
label model if any selected label function voted; otherwise reject the
instance (it is dropped from downstream training). Tau is tuned on the
validation split to maximize accuracy over the non-rejected subset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .al_model import confidence

SOURCE_AL = "AL"
SOURCE_LM = "LM"
SOURCE_NONE = "NONE"


@dataclass(frozen=True)
class AggregatedLabel:
    probs: np.ndarray | None  # None means rejected
    source: str  # SOURCE_AL | SOURCE_LM | SOURCE_NONE

    def __post_init__(self):
        if (self.probs is None) != (self.source == SOURCE_NONE):
            raise ValueError("rejected outcome and NONE source must coincide")

    @property
    def rejected(self) -> bool:
        return self.probs is None


def confusion(
    al: np.ndarray, lm: np.ndarray | None, tau: float
) -> AggregatedLabel:
    """One instance's aggregated label.

    AL branch wins at confidence >= tau; the label model needs at least
    one active selected LF (non-None lm); otherwise rejected.
    """
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    if confidence(al) >= tau:
        return AggregatedLabel(probs=np.asarray(al, dtype=float), source=SOURCE_AL)
    if lm is not None:
        return AggregatedLabel(probs=np.asarray(lm, dtype=float), source=SOURCE_LM)
    return AggregatedLabel(probs=None, source=SOURCE_NONE)


def aggregate_batch(
    al_probs: np.ndarray,
    lm_probs: np.ndarray,
    lm_covered: np.ndarray,
    tau: float,
    use_al: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized twin of `confusion` over n instances.

    Returns (probs, source) where probs is n x C (rows of rejected
    instances are left as zeros) and source holds "AL"/"LM"/"NONE" per
    row. With use_al=False the AL branch is disabled and covered
    instances pass the label-model posterior through.
    """
    al_probs = np.asarray(al_probs, dtype=float)
    lm_probs = np.asarray(lm_probs, dtype=float)
    lm_covered = np.asarray(lm_covered, dtype=bool)
    n, c = al_probs.shape
    adopt_al = (al_probs.max(axis=1) >= tau) if use_al else np.zeros(n, dtype=bool)
    use_lm = ~adopt_al & lm_covered
    probs = np.zeros((n, c))
    probs[adopt_al] = al_probs[adopt_al]
    probs[use_lm] = lm_probs[use_lm]
    source = np.where(adopt_al, SOURCE_AL, np.where(use_lm, SOURCE_LM, SOURCE_NONE))
    return probs, source


def candidate_thresholds(al_conf_valid) -> np.ndarray:
    """Sorted unique validation confidences plus the 0.0 and 1.0 bounds."""
    values = np.asarray(al_conf_valid, dtype=float)
    return np.unique(np.concatenate([values.ravel(), [0.0, 1.0]]))


def tune_threshold(
    al_probs: np.ndarray,
    lm_probs: np.ndarray,
    lm_covered: np.ndarray,
    y_true: np.ndarray,
) -> float:
    """Pick tau maximizing aggregated accuracy on the validation split.

    Accuracy counts only non-rejected instances; a candidate that rejects
    everything scores -inf. Ties prefer higher coverage, then smaller
    tau. If every candidate rejects everything, returns 1.0.
    """
    al_probs = np.asarray(al_probs, dtype=float)
    lm_probs = np.asarray(lm_probs, dtype=float)
    lm_covered = np.asarray(lm_covered, dtype=bool)
    y_true = np.asarray(y_true, dtype=int)
    if len(al_probs) == 0:
        raise ValueError("validation set must be non-empty")

    conf = al_probs.max(axis=1)
    al_correct = np.argmax(al_probs, axis=1) == y_true
    lm_correct = lm_covered & (np.argmax(lm_probs, axis=1) == y_true)
    cands = candidate_thresholds(conf)

    adopt = conf[None, :] >= cands[:, None]  # (T, n)
    covered_count = (adopt | lm_covered[None, :]).sum(axis=1)
    correct_count = (adopt & al_correct[None, :]).sum(axis=1) + (
        ~adopt & lm_correct[None, :]
    ).sum(axis=1)
    with np.errstate(invalid="ignore"):
        acc = np.where(covered_count > 0, correct_count / np.maximum(covered_count, 1), -np.inf)
    if np.all(np.isneginf(acc)):
        return 1.0
    # primary: accuracy desc; secondary: coverage desc; tertiary: tau asc
    order = np.lexsort((cands, -covered_count, -acc))
    return float(cands[order[0]])
