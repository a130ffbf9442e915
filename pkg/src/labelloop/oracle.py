"""Simulated user for scripted sessions.

Given a query instance, the simulated user enumerates plausible label
functions around it (keyword rules from the query's tokens, or decision
stumps at the query's feature values), keeps those whose ground-truth
train accuracy clears a threshold, and returns one sampled proportionally
to coverage. Label noise flips the label the user believes in, so the
returned LF targets the wrong class for that query while still clearing
the accuracy bar on the train split.

Ground-truth labels are read here only: this module plays the human, not
the system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ABSTAIN, TEXT, TRAIN, Dataset, Instance, LabelFunction, apply_lf

NO_LF = None  # sentinel returned when the user has nothing to offer


@dataclass
class OracleConfig:
    acc_threshold: float = 0.6
    noise_rate: float = 0.0
    history: set[tuple] = field(default_factory=set)

    def __post_init__(self):
        if not (0.0 < self.acc_threshold < 1.0):
            raise ValueError(f"acc_threshold must be in (0, 1), got {self.acc_threshold}")
        if not (0.0 <= self.noise_rate <= 1.0):
            raise ValueError(f"noise_rate must be in [0, 1], got {self.noise_rate}")


def lf_true_accuracy(lf: LabelFunction, train_instances: list[Instance]) -> float | None:
    """Ground-truth accuracy over activated train instances; None if never active."""
    activated = 0
    correct = 0
    for x in train_instances:
        vote = apply_lf(lf, x)
        if vote == ABSTAIN:
            continue
        activated += 1
        if vote == x.true_label:
            correct += 1
    if activated == 0:
        return None
    return correct / activated


class TrainIndex:
    """Accuracy and coverage lookups over the train split in O(log n).

    Text: per-token document counts by class. Tabular: per-feature sorted
    values with cumulative class counts, so one-sided stumps reduce to a
    binary search. Results match lf_true_accuracy / lf_coverage exactly.
    """

    def __init__(self, d: Dataset):
        train = d.subset(TRAIN)
        if not train:
            raise ValueError("dataset has an empty train split")
        self.n_train = len(train)
        self.n_classes = d.n_classes
        self.kind = d.kind
        if d.kind == TEXT:
            totals: dict[str, int] = {}
            by_class: dict[str, np.ndarray] = {}
            for inst in train:
                for tok in set(inst.payload):
                    totals[tok] = totals.get(tok, 0) + 1
                    if tok not in by_class:
                        by_class[tok] = np.zeros(d.n_classes, dtype=int)
                    by_class[tok][inst.true_label] += 1
            self._totals = totals
            self._by_class = by_class
        else:
            F = np.stack([inst.payload for inst in train], axis=0)
            y = np.array([inst.true_label for inst in train], dtype=int)
            self._sorted_vals = []
            self._cum_class = []  # (n_train + 1) x C prefix counts in sorted order
            for j in range(F.shape[1]):
                order = np.argsort(F[:, j], kind="stable")
                self._sorted_vals.append(F[order, j])
                onehot = np.zeros((self.n_train, d.n_classes), dtype=int)
                onehot[np.arange(self.n_train), y[order]] = 1
                self._cum_class.append(
                    np.vstack([np.zeros(d.n_classes, dtype=int), onehot.cumsum(axis=0)])
                )

    def _counts(self, lf: LabelFunction) -> tuple[int, int]:
        """(activated, correct) for the LF over the train split."""
        if lf.kind == "keyword":
            total = self._totals.get(lf.word, 0)
            if total == 0:
                return 0, 0
            return total, int(self._by_class[lf.word][lf.target])
        vals = self._sorted_vals[lf.feature]
        cum = self._cum_class[lf.feature]
        if lf.op == "<=":
            k = int(np.searchsorted(vals, lf.value, side="right"))
            return k, int(cum[k, lf.target])
        k = int(np.searchsorted(vals, lf.value, side="left"))
        return self.n_train - k, int(cum[-1, lf.target] - cum[k, lf.target])

    def accuracy(self, lf: LabelFunction) -> float | None:
        activated, correct = self._counts(lf)
        if activated == 0:
            return None
        return correct / activated

    def coverage(self, lf: LabelFunction) -> float:
        activated, _ = self._counts(lf)
        return activated / self.n_train


def _enumerate_raw(x: Instance, d: Dataset) -> list[LabelFunction]:
    """All candidate LFs around a query, before any filtering.

    Text: distinct query tokens in first-appearance order, each class.
    Tabular: each feature, each comparison direction at the query's
    value, each class.
    """
    out = []
    if d.kind == TEXT:
        seen = set()
        for tok in x.payload:
            if tok in seen:
                continue
            seen.add(tok)
            for y in range(d.n_classes):
                out.append(LabelFunction.keyword(tok, y))
    else:
        for j in range(len(x.payload)):
            for op in ("<=", ">="):
                for y in range(d.n_classes):
                    out.append(LabelFunction.stump(j, float(x.payload[j]), op, y))
    return out


def candidate_lfs(
    x: Instance, d: Dataset, cfg: OracleConfig, index: TrainIndex | None = None
) -> list[LabelFunction]:
    """Candidates that clear the true-accuracy threshold and are unseen."""
    if index is None:
        train = d.subset(TRAIN)
        acc = lambda lf: lf_true_accuracy(lf, train)  # noqa: E731
    else:
        acc = index.accuracy
    out = []
    for lf in _enumerate_raw(x, d):
        if lf.identity() in cfg.history:
            continue
        a = acc(lf)
        if a is not None and a > cfg.acc_threshold:
            out.append(lf)
    return out


def apply_noise(true_label: int, noise_rate: float, rng: np.random.Generator) -> int:
    """Flip a binary label with probability noise_rate (always draws once)."""
    flip = rng.random() < noise_rate
    return 1 - true_label if flip else true_label


def respond(
    x: Instance,
    d: Dataset,
    cfg: OracleConfig,
    rng: np.random.Generator,
    index: TrainIndex | None = None,
) -> LabelFunction | None:
    """One simulated answer: an LF targeting the (possibly flipped) label.

    Among candidates for the effective label, samples one with
    probability proportional to train coverage, records its identity so
    it is never returned again, and returns it. Returns NO_LF when no
    candidate exists; the caller still charges the iteration budget.
    """
    if x.true_label is None:
        raise ValueError("simulated user requires ground-truth labels")
    y_eff = apply_noise(x.true_label, cfg.noise_rate, rng)
    cands = [lf for lf in candidate_lfs(x, d, cfg, index) if lf.target == y_eff]
    if not cands:
        return NO_LF
    if index is None:
        from .core import lf_coverage

        coverages = np.array([lf_coverage(lf, d) for lf in cands])
    else:
        coverages = np.array([index.coverage(lf) for lf in cands])
    cum = np.cumsum(coverages)
    draw = rng.random() * cum[-1]
    pick = min(int(np.searchsorted(cum, draw, side="right")), len(cands) - 1)
    lf = cands[pick]
    cfg.history.add(lf.identity())
    if index is not None:
        acc = index.accuracy(lf)
        assert acc is not None and acc > cfg.acc_threshold
    return lf
