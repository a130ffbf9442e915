"""The end-to-end labelling loop: sessions, checkpoints, ablations.

One Session owns the query/respond/update cycle on a split dataset. The
loop is split into propose_query and apply_response so the same
mechanics serve both scripted runs (simulated user answers in-process)
and the HTTP service (a human answers over the wire): identical inputs
must produce identical curves either way.

RNG discipline: the session seed spawns three independent child streams
(sampler, simulated user, reserved for models). Checkpoint evaluation
draws no randomness, so changing the eval cadence never perturbs the
query sequence.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import aggregate, al_model, featurize, label_model, lfselect
from . import oracle as oracle_mod
from . import sampler as sampler_mod
from .core import (
    ABSTAIN,
    TEST,
    TEXT,
    TRAIN,
    VALID,
    Dataset,
    FastApplier,
    LabelFunction,
    apply_lf,
    load_tabular_csv,
    load_text_jsonl,
    make_synthetic_tabular,
    make_synthetic_text,
)

MODE_FLAGS = {
    "activedp": (True, True),
    "baseline": (False, False),
    "labelpick": (True, False),
    "confusion": (False, True),
}
MODES = tuple(MODE_FLAGS) + ("al",)

CSV_COLUMNS = ("seed", "iteration", "test_acc", "label_acc", "coverage", "n_lfs_selected", "tau")

ALPHA_DEFAULTS = {"text": 0.5, "tabular": 0.99}


class ConfigError(ValueError):
    """Invalid run configuration (maps to CLI exit code 2 / HTTP 400)."""


@dataclass(frozen=True)
class SessionConfig:
    dataset: str = "synth:text"
    budget: int = 300
    eval_every: int = 10
    sampler: str = "adp"
    alpha: float | None = None  # None: 0.5 for text, 0.99 for tabular
    acc_threshold: float = 0.6
    noise_rate: float = 0.0
    use_labelpick: bool = True
    use_confusion: bool = True
    pure_al: bool = False  # uncertainty-sampling baseline with true labels
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    l2: float = 1e-3
    glasso_lambda: float = 0.1
    edge_tol: float = 1e-4
    min_rows: int = 8
    max_vocab: int = 1000
    synth_n: int = 2000
    synth_flip: float = 0.05
    synth_sep: float = 2.0
    data_seed: int = 0

    def __post_init__(self):
        if self.budget < 0:
            raise ConfigError(f"budget must be >= 0, got {self.budget}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.budget != 0 and self.budget < self.eval_every:
            raise ConfigError("budget must be 0 or >= eval_every")
        if self.sampler not in sampler_mod.STRATEGIES:
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if self.alpha is not None and not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not (0.0 < self.acc_threshold < 1.0):
            raise ConfigError(f"acc_threshold must be in (0, 1), got {self.acc_threshold}")
        if not (0.0 <= self.noise_rate <= 1.0):
            raise ConfigError(f"noise_rate must be in [0, 1], got {self.noise_rate}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.l2 < 0 or self.glasso_lambda < 0:
            raise ConfigError("regularization strengths must be >= 0")
        if self.max_vocab < 1:
            raise ConfigError("max_vocab must be >= 1")

    def with_mode(self, mode: str) -> "SessionConfig":
        if mode == "al":
            return replace(self, pure_al=True, sampler="us")
        if mode not in MODE_FLAGS:
            raise ConfigError(f"unknown mode {mode!r}")
        lp, cf = MODE_FLAGS[mode]
        return replace(self, use_labelpick=lp, use_confusion=cf, pure_al=False)


@dataclass(frozen=True)
class Checkpoint:
    iteration: int
    test_acc: float
    label_acc: float
    coverage: float
    n_lfs_selected: int
    tau: float
    flagged: bool = False  # end model degenerated to majority-class guessing


@dataclass
class PerformanceCurve:
    seed: int
    checkpoints: list[Checkpoint] = field(default_factory=list)


def average_accuracy(curve: PerformanceCurve) -> float:
    """Mean test accuracy over all checkpoints of one run."""
    if not curve.checkpoints:
        raise ValueError("curve has no checkpoints")
    return float(np.mean([c.test_acc for c in curve.checkpoints]))


def prepare_dataset(config: SessionConfig, seed: int) -> Dataset:
    """Build or load the dataset, then split it with the run seed.

    The dataset itself comes from data_seed (or the file), so multi-seed
    runs vary the split and the decision streams, not the data.
    """
    spec = config.dataset
    if spec == "synth:text":
        d = make_synthetic_text(
            config.synth_n, flip_noise=config.synth_flip, seed=config.data_seed
        )
    elif spec == "synth:tab":
        d = make_synthetic_tabular(
            config.synth_n, cluster_sep=config.synth_sep, seed=config.data_seed
        )
    elif spec.endswith(".jsonl") or spec.endswith(".json"):
        d = load_text_jsonl(spec)
    elif spec.endswith(".csv"):
        d = load_tabular_csv(spec)
    else:
        raise ConfigError(
            f"dataset must be synth:text, synth:tab, a .jsonl file, or a .csv file, got {spec!r}"
        )
    from .core import split_dataset

    return split_dataset(d, seed=seed)


class Session:
    """One run of the interactive loop at a fixed seed."""

    def __init__(self, config: SessionConfig, seed: int, dataset: Dataset | None = None):
        self.config = config
        self.seed = seed
        d = dataset if dataset is not None else prepare_dataset(config, seed)
        if d.n_classes != 2:
            raise ConfigError("sessions support binary tasks only")
        self.dataset = d
        self.train_pos = d.split_indices(TRAIN)
        self.valid_pos = d.split_indices(VALID)
        self.test_pos = d.split_indices(TEST)
        if config.budget > len(self.train_pos):
            raise ConfigError(
                f"budget {config.budget} exceeds train-split size {len(self.train_pos)}"
            )
        self.train_ids = np.array([d.instances[p].id for p in self.train_pos])
        self._pos_by_id = {d.instances[p].id: p for p in self.train_pos}
        self.y_true = d.true_labels()

        if d.kind == TEXT:
            corpus = [d.instances[p].payload for p in self.train_pos]
            self.vocab = featurize.build_vocab(corpus, max_size=config.max_vocab)
            self.X = featurize.tfidf([inst.payload for inst in d.instances], self.vocab)
        else:
            train_matrix = np.stack([d.instances[p].payload for p in self.train_pos])
            all_matrix = np.stack([inst.payload for inst in d.instances])
            self.X = featurize.standardize_tabular(train_matrix, all_matrix)

        self.applier = FastApplier(d.instances, d.kind)
        self.index = oracle_mod.TrainIndex(d)
        self.alpha = config.alpha if config.alpha is not None else ALPHA_DEFAULTS[d.kind]

        streams = np.random.SeedSequence(seed).spawn(3)
        self.sampler_state = sampler_mod.SamplerState(
            strategy=config.sampler, rng=np.random.default_rng(streams[0]), alpha=self.alpha
        )
        self.oracle_rng = np.random.default_rng(streams[1])
        self.model_rng = np.random.default_rng(streams[2])  # reserved
        self.oracle_cfg = oracle_mod.OracleConfig(
            acc_threshold=config.acc_threshold, noise_rate=config.noise_rate
        )

        self.lfs: list[LabelFunction] = []
        self._lf_cols: list[np.ndarray] = []  # weak labels over all instances, per LF
        self.pairs: list[tuple[int, int]] = []  # (position, pseudo-label)
        self.selected: list[int] = []  # positions into self.lfs
        self.selection_report: lfselect.SelectionReport | None = None
        self.lm_params: label_model.GenerativeParams | None = None
        self.al = al_model.zero_model(self.X.shape[1], config.l2)
        self.tau = 1.0
        self.iteration = 0
        self.checkpoints: list[Checkpoint] = []
        self.pending: int | None = None  # position of the outstanding query

    # -- matrix helpers ------------------------------------------------

    def _cols_matrix(self, positions: np.ndarray) -> np.ndarray:
        if not self._lf_cols:
            return np.zeros((len(positions), 0), dtype=int)
        return np.stack([col[positions] for col in self._lf_cols], axis=1)

    def _lm_on(self, positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Label-model posteriors + coverage mask over selected LFs."""
        n = len(positions)
        if self.lm_params is None or not self.selected:
            return np.full((n, 2), 0.5), np.zeros(n, dtype=bool)
        W = np.stack([self._lf_cols[j][positions] for j in self.selected], axis=1)
        return label_model.posterior_matrix(self.lm_params, W)

    # -- the loop ------------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.iteration >= self.config.budget

    def propose_query(self) -> int:
        """Pick the next train position to ask about."""
        if self.finished:
            raise RuntimeError("budget exhausted")
        if self.pending is not None:
            raise RuntimeError("a query is already outstanding")
        al_probs = al_model.predict_proba(self.al, self.X[self.train_pos])
        lm_probs, _ = self._lm_on(self.train_pos)
        qid = sampler_mod.select_next(self.sampler_state, self.train_ids, al_probs, lm_probs)
        self.pending = self._pos_by_id[qid]
        return self.pending

    def apply_response(self, lf: LabelFunction | None) -> None:
        """Consume one budget unit; on an LF, update data and models.

        None mirrors the simulated user having nothing to offer (or a
        human skipping): the instance leaves the pool, nothing else
        changes.
        """
        if self.pending is None:
            raise RuntimeError("no outstanding query")
        pos = self.pending
        self.pending = None
        self.sampler_state.mark(self.dataset.instances[pos].id)
        self.iteration += 1
        if lf is not None:
            x = self.dataset.instances[pos]
            pseudo = apply_lf(lf, x)
            if pseudo == ABSTAIN:
                raise ValueError("LF must label its own query instance")
            lf = lf.with_id(len(self.lfs))
            self.lfs.append(lf)
            self._lf_cols.append(self.applier.column(lf))
            self.pairs.append((pos, pseudo))
            self._update_models()
        if self.config.eval_every and self.iteration % self.config.eval_every == 0:
            self.evaluate_checkpoint()

    def run_iteration(self) -> None:
        pos = self.propose_query()
        lf = oracle_mod.respond(
            self.dataset.instances[pos],
            self.dataset,
            self.oracle_cfg,
            self.oracle_rng,
            self.index,
        )
        self.apply_response(lf)

    def run(self) -> PerformanceCurve:
        if self.config.budget == 0:
            self.evaluate_checkpoint()
        while not self.finished:
            self.run_iteration()
        return PerformanceCurve(seed=self.seed, checkpoints=self.checkpoints)

    # -- model updates ---------------------------------------------------

    def _update_models(self) -> None:
        y_valid = self.y_true[self.valid_pos]
        pair_positions = np.array([p for p, _ in self.pairs], dtype=int)
        pseudo = np.array([y for _, y in self.pairs], dtype=int)

        if self.config.use_labelpick:
            W_valid = self._cols_matrix(self.valid_pos)
            W_pairs = self._cols_matrix(pair_positions)
            self.selected, self.selection_report = lfselect.label_pick_W(
                W_valid,
                y_valid,
                W_pairs,
                pseudo,
                2,
                self.lfs,
                lam=self.config.glasso_lambda,
                edge_tol=self.config.edge_tol,
                min_rows=self.config.min_rows,
            )
        else:
            self.selected = list(range(len(self.lfs)))
            self.selection_report = lfselect.SelectionReport(
                status="selection_disabled",
                survivor_ids=[lf.lf_id for lf in self.lfs],
                selected_ids=[lf.lf_id for lf in self.lfs],
            )

        if self.selected:
            W_train_sel = np.stack(
                [self._lf_cols[j][self.train_pos] for j in self.selected], axis=1
            )
            if np.any(W_train_sel != ABSTAIN):
                self.lm_params = label_model.fit_generative(W_train_sel, 2)
            else:
                self.lm_params = None
        else:
            self.lm_params = None

        if len(np.unique(pseudo)) >= 2:
            self.al = al_model.fit(self.X[pair_positions], pseudo, l2=self.config.l2)
        else:
            self.al = al_model.zero_model(self.X.shape[1], self.config.l2)

        al_v = al_model.predict_proba(self.al, self.X[self.valid_pos])
        lm_v, covered_v = self._lm_on(self.valid_pos)
        self.tau = aggregate.tune_threshold(al_v, lm_v, covered_v, y_valid)

    # -- evaluation ------------------------------------------------------

    def aggregate_train(self) -> tuple[np.ndarray, np.ndarray]:
        """Aggregated label probs + source for every train instance."""
        al_p = al_model.predict_proba(self.al, self.X[self.train_pos])
        lm_p, covered = self._lm_on(self.train_pos)
        return aggregate.aggregate_batch(
            al_p, lm_p, covered, self.tau, use_al=self.config.use_confusion
        )

    def evaluate_checkpoint(self) -> Checkpoint:
        probs, source = self.aggregate_train()
        nonrej = source != aggregate.SOURCE_NONE
        coverage = float(nonrej.mean())
        y_train = self.y_true[self.train_pos]
        if nonrej.any():
            hard = probs[nonrej].argmax(axis=1)
            label_acc = float((hard == y_train[nonrej]).mean())
        else:
            hard = np.zeros(0, dtype=int)
            label_acc = float("nan")
        y_test = self.y_true[self.test_pos]
        classes = np.unique(hard)
        flagged = len(classes) < 2
        if not flagged:
            end = al_model.fit(self.X[self.train_pos][nonrej], hard, l2=self.config.l2)
            predictions = al_model.predict(end, self.X[self.test_pos])
            test_acc = float((predictions == y_test).mean())
        else:
            majority = int(classes[0]) if len(classes) == 1 else 0
            test_acc = float((y_test == majority).mean())
        cp = Checkpoint(
            iteration=self.iteration,
            test_acc=test_acc,
            label_acc=label_acc,
            coverage=coverage,
            n_lfs_selected=len(self.selected),
            tau=float(self.tau),
            flagged=flagged,
        )
        self.checkpoints.append(cp)
        return cp

    def export_rows(self) -> list[dict]:
        """Current aggregated label per train instance, JSONL-ready."""
        probs, source = self.aggregate_train()
        rows = []
        for k, pos in enumerate(self.train_pos):
            inst = self.dataset.instances[pos]
            if source[k] == aggregate.SOURCE_NONE:
                rows.append({"id": inst.id, "source": "REJECTED", "soft_label": None})
            else:
                rows.append(
                    {
                        "id": inst.id,
                        "source": str(source[k]),
                        "soft_label": [float(v) for v in probs[k]],
                    }
                )
        return rows


class ALBaselineSession:
    """Uncertainty-sampling active learning with true instance labels.

    The comparison baseline: no label functions at all. The model trained
    on the labelled subset doubles as the end model.
    """

    def __init__(self, config: SessionConfig, seed: int, dataset: Dataset | None = None):
        self.config = config
        self.seed = seed
        d = dataset if dataset is not None else prepare_dataset(config, seed)
        if d.n_classes != 2:
            raise ConfigError("sessions support binary tasks only")
        self.dataset = d
        self.train_pos = d.split_indices(TRAIN)
        self.test_pos = d.split_indices(TEST)
        if config.budget > len(self.train_pos):
            raise ConfigError(
                f"budget {config.budget} exceeds train-split size {len(self.train_pos)}"
            )
        self.train_ids = np.array([d.instances[p].id for p in self.train_pos])
        self._pos_by_id = {d.instances[p].id: p for p in self.train_pos}
        self.y_true = d.true_labels()
        if d.kind == TEXT:
            corpus = [d.instances[p].payload for p in self.train_pos]
            vocab = featurize.build_vocab(corpus, max_size=config.max_vocab)
            self.X = featurize.tfidf([inst.payload for inst in d.instances], vocab)
        else:
            train_matrix = np.stack([d.instances[p].payload for p in self.train_pos])
            all_matrix = np.stack([inst.payload for inst in d.instances])
            self.X = featurize.standardize_tabular(train_matrix, all_matrix)
        streams = np.random.SeedSequence(seed).spawn(3)
        self.sampler_state = sampler_mod.SamplerState(
            strategy="us", rng=np.random.default_rng(streams[0])
        )
        self.model = al_model.zero_model(self.X.shape[1], config.l2)
        self.labelled: list[tuple[int, int]] = []
        self.iteration = 0
        self.checkpoints: list[Checkpoint] = []

    def evaluate_checkpoint(self) -> Checkpoint:
        predictions = al_model.predict(self.model, self.X[self.test_pos])
        cp = Checkpoint(
            iteration=self.iteration,
            test_acc=float((predictions == self.y_true[self.test_pos]).mean()),
            label_acc=1.0 if self.labelled else float("nan"),
            coverage=len(self.labelled) / len(self.train_pos),
            n_lfs_selected=0,
            tau=float("nan"),
            flagged=self.model.n_trained == 0,
        )
        self.checkpoints.append(cp)
        return cp

    def run(self) -> PerformanceCurve:
        if self.config.budget == 0:
            self.evaluate_checkpoint()
        while self.iteration < self.config.budget:
            probs = al_model.predict_proba(self.model, self.X[self.train_pos])
            qid = sampler_mod.select_next(self.sampler_state, self.train_ids, probs)
            pos = self._pos_by_id[qid]
            self.sampler_state.mark(qid)
            self.labelled.append((pos, int(self.y_true[pos])))
            self.iteration += 1
            labels = np.array([y for _, y in self.labelled])
            if len(np.unique(labels)) >= 2:
                rows = np.array([p for p, _ in self.labelled])
                self.model = al_model.fit(self.X[rows], labels, l2=self.config.l2)
            if self.iteration % self.config.eval_every == 0:
                self.evaluate_checkpoint()
        return PerformanceCurve(seed=self.seed, checkpoints=self.checkpoints)


def run_session(config: SessionConfig, seed: int, dataset: Dataset | None = None) -> PerformanceCurve:
    if config.pure_al:
        return ALBaselineSession(config, seed, dataset).run()
    return Session(config, seed, dataset).run()


def run_sessions(config: SessionConfig) -> list[PerformanceCurve]:
    return [run_session(config, seed) for seed in config.seeds]


def run_ablation(config: SessionConfig) -> dict[str, list[PerformanceCurve]]:
    """The four flag combinations, sharing seeds and data."""
    return {mode: run_sessions(config.with_mode(mode)) for mode in MODE_FLAGS}


def curves_to_csv(curves: list[PerformanceCurve]) -> str:
    """Per-checkpoint rows across seeds, fixed column order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for curve in curves:
        for c in curve.checkpoints:
            writer.writerow(
                [
                    curve.seed,
                    c.iteration,
                    repr(c.test_acc),
                    repr(c.label_acc),
                    repr(c.coverage),
                    c.n_lfs_selected,
                    repr(c.tau),
                ]
            )
    return buf.getvalue()


def ablation_to_csv(results: dict[str, list[PerformanceCurve]]) -> str:
    """One row per mode: per-seed average accuracy plus the mean."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    seeds = [curve.seed for curve in next(iter(results.values()))]
    writer.writerow(["mode"] + [f"seed_{s}" for s in seeds] + ["mean"])
    for mode, curves in results.items():
        accs = [average_accuracy(c) for c in curves]
        writer.writerow([mode] + [repr(a) for a in accs] + [repr(float(np.mean(accs)))])
    return buf.getvalue()
