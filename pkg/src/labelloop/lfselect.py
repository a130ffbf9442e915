"""Selecting which accepted label functions to keep.

Pipeline: prune LFs that perform worse than random on the validation
split, build the small table of encoded LF outputs plus pseudo-labels
over the queried instances, estimate its sparse dependency structure,
and keep the LFs in the Markov blanket of the pseudo-label column. Every
failure or low-evidence path degrades to the accuracy-filter survivors
rather than erroring, so selection never blocks the session loop.

The matrix-level functions (suffix _W) are the shared core; the
object-level wrappers apply LFs to instances and delegate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import glasso
from .core import ABSTAIN, Dataset, Instance, LabelFunction, apply_lf

# selection outcome codes, also served to the UI
VIA_BLANKET = "blanket"
FALLBACK_FEW_SURVIVORS = "too_few_survivors"
FALLBACK_FEW_ROWS = "too_few_rows"
FALLBACK_CONSTANT_TARGET = "constant_pseudolabel"
FALLBACK_ALL_CONSTANT = "all_columns_constant"
FALLBACK_EMPTY_BLANKET = "empty_blanket"
FALLBACK_SOLVER_ERROR = "solver_error"
FALLBACK_UNSUPPORTED = "unsupported_classes"


@dataclass
class SelectionReport:
    """Per-iteration account of pruning and selection, JSON-friendly."""

    status: str
    accuracies: list[dict] = field(default_factory=list)
    survivor_ids: list[int] = field(default_factory=list)
    selected_ids: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "accuracies": self.accuracies,
            "survivor_ids": self.survivor_ids,
            "selected_ids": self.selected_ids,
        }


def accuracy_filter_W(
    W_valid: np.ndarray, y_valid: np.ndarray, n_classes: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrix core of the accuracy filter.

    Returns (keep mask, activated counts, accuracies) per column, with
    NaN accuracy for never-activated columns. Kept: activated at least
    once and accuracy >= 1/C (strictly-worse-than-random is pruned).
    """
    W_valid = np.asarray(W_valid, dtype=int)
    y_valid = np.asarray(y_valid, dtype=int)
    activated = (W_valid != ABSTAIN).sum(axis=0)
    correct = (W_valid == y_valid[:, None]).sum(axis=0)
    with np.errstate(invalid="ignore"):
        accuracy = np.where(activated > 0, correct / np.maximum(activated, 1), np.nan)
    keep = (activated > 0) & (accuracy >= 1.0 / n_classes)
    return keep, activated, accuracy


def accuracy_filter(
    lfs: list[LabelFunction], valid_instances: list[Instance], n_classes: int
) -> tuple[list[LabelFunction], list[dict]]:
    """Prune LFs worse than random on validation; keep original order."""
    if not valid_instances:
        raise ValueError("validation split must be non-empty")
    y_valid = np.array([x.true_label for x in valid_instances], dtype=int)
    if not lfs:
        return [], []
    W = np.stack([[apply_lf(lf, x) for x in valid_instances] for lf in lfs], axis=1)
    keep, activated, accuracy = accuracy_filter_W(W, y_valid, n_classes)
    report = [
        {
            "lf_id": lf.lf_id,
            "lf": lf.describe(),
            "activated": int(activated[i]),
            "accuracy": None if np.isnan(accuracy[i]) else float(accuracy[i]),
            "kept": bool(keep[i]),
        }
        for i, lf in enumerate(lfs)
    ]
    return [lf for i, lf in enumerate(lfs) if keep[i]], report


def encode_table_W(W_rows: np.ndarray, pseudo_labels: np.ndarray) -> np.ndarray:
    """Encode binary weak labels and pseudo-labels as {-1, 0, +1} columns.

    LF vote 0 -> -1, vote 1 -> +1, abstain -> 0; pseudo-label y -> 2y-1
    appended as the final column.
    """
    W_rows = np.asarray(W_rows, dtype=int)
    pseudo = np.asarray(pseudo_labels, dtype=int)
    encoded = np.zeros(W_rows.shape, dtype=float)
    encoded[W_rows == 1] = 1.0
    encoded[W_rows == 0] = -1.0
    return np.column_stack([encoded, 2.0 * pseudo - 1.0])


def encode_table(
    pairs: list[tuple[int, int]], survivors: list[LabelFunction], d: Dataset
) -> np.ndarray:
    """Build the encoded LF/pseudo-label table for the queried instances."""
    if d.n_classes != 2:
        raise ValueError("encoding is defined for binary tasks only")
    by_id = {inst.id: inst for inst in d.instances}
    instances = [by_id[i] for i, _ in pairs]
    pseudo = np.array([y for _, y in pairs], dtype=int)
    if survivors:
        W = np.stack([[apply_lf(lf, x) for x in instances] for lf in survivors], axis=1)
    else:
        W = np.zeros((len(pairs), 0), dtype=int)
    return encode_table_W(W, pseudo)


def markov_blanket(theta: np.ndarray, y_index: int, edge_tol: float = 1e-4) -> list[int]:
    """Indices with a nonzero precision entry against the target column."""
    theta = np.asarray(theta, dtype=float)
    column = np.abs(theta[:, y_index])
    hits = np.flatnonzero(column > edge_tol)
    return [int(j) for j in hits if j != y_index]


def label_pick_W(
    W_valid: np.ndarray,
    y_valid: np.ndarray,
    W_pair_rows: np.ndarray,
    pseudo_labels: np.ndarray,
    n_classes: int,
    lfs: list[LabelFunction],
    lam: float = 0.1,
    edge_tol: float = 1e-4,
    min_rows: int = 8,
) -> tuple[list[int], SelectionReport]:
    """Matrix core of the selection pipeline.

    Returns positions (indices into `lfs`) of the selected LFs plus the
    report. `W_valid` has one column per LF over the validation split;
    `W_pair_rows` has one row per queried pair over the same columns.
    """
    keep, activated, accuracy = accuracy_filter_W(W_valid, y_valid, n_classes)
    report = SelectionReport(status="")
    report.accuracies = [
        {
            "lf_id": lf.lf_id,
            "lf": lf.describe(),
            "activated": int(activated[i]),
            "accuracy": None if np.isnan(accuracy[i]) else float(accuracy[i]),
            "kept": bool(keep[i]),
        }
        for i, lf in enumerate(lfs)
    ]
    survivors = [i for i in range(len(lfs)) if keep[i]]
    report.survivor_ids = [lfs[i].lf_id for i in survivors]

    def finish(selected: list[int], status: str) -> tuple[list[int], SelectionReport]:
        report.status = status
        report.selected_ids = [lfs[i].lf_id for i in selected]
        return selected, report

    if len(survivors) <= 1:
        return finish(survivors, FALLBACK_FEW_SURVIVORS)
    if len(pseudo_labels) < min_rows:
        return finish(survivors, FALLBACK_FEW_ROWS)
    if n_classes != 2:
        return finish(survivors, FALLBACK_UNSUPPORTED)

    table = encode_table_W(np.asarray(W_pair_rows)[:, survivors], pseudo_labels)
    y_col = table.shape[1] - 1
    cov = glasso.empirical_cov(table)
    if y_col in cov.dropped:
        return finish(survivors, FALLBACK_CONSTANT_TARGET)
    # constant LF columns carry no covariance signal; keep them as-is
    auto_keep = [survivors[c] for c in cov.dropped]
    modelled = [survivors[c] for c in cov.kept if c != y_col]
    if not modelled:
        return finish(survivors, FALLBACK_ALL_CONSTANT)
    try:
        result = glasso.graphical_lasso(cov.S, lam)
        y_pos = int(np.flatnonzero(cov.kept == y_col)[0])
        blanket = markov_blanket(result.theta, y_pos, edge_tol)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError):
        return finish(survivors, FALLBACK_SOLVER_ERROR)
    if not blanket:
        return finish(survivors, FALLBACK_EMPTY_BLANKET)
    chosen = sorted({survivors[cov.kept[j]] for j in blanket} | set(auto_keep))
    return finish(chosen, VIA_BLANKET)


def label_pick(
    lfs: list[LabelFunction],
    pairs: list[tuple[int, int]],
    d: Dataset,
    lam: float = 0.1,
    edge_tol: float = 1e-4,
    min_rows: int = 8,
) -> tuple[list[LabelFunction], SelectionReport]:
    """Full selection pipeline over LF objects and (id, pseudo-label) pairs."""
    valid = d.subset("valid")
    if not valid:
        raise ValueError("validation split must be non-empty")
    y_valid = np.array([x.true_label for x in valid], dtype=int)
    if not lfs:
        return [], SelectionReport(status=FALLBACK_FEW_SURVIVORS)
    W_valid = np.stack([[apply_lf(lf, x) for x in valid] for lf in lfs], axis=1)
    by_id = {inst.id: inst for inst in d.instances}
    pair_instances = [by_id[i] for i, _ in pairs]
    if pair_instances:
        W_pairs = np.stack(
            [[apply_lf(lf, x) for lf in lfs] for x in pair_instances], axis=0
        )
    else:
        W_pairs = np.zeros((0, len(lfs)), dtype=int)
    pseudo = np.array([y for _, y in pairs], dtype=int)
    positions, report = label_pick_W(
        W_valid,
        y_valid,
        W_pairs,
        pseudo,
        d.n_classes,
        lfs,
        lam=lam,
        edge_tol=edge_tol,
        min_rows=min_rows,
    )
    return [lfs[i] for i in positions], report
