"""Domain types, dataset ingestion, splitting, and label-function application.

Instances carry either a token tuple (text) or a numeric feature vector
(tabular), plus an optional hidden ground-truth label. Ground truth is
only ever read by the simulated user and by validation-set tuning and
filtering; model-training code paths receive features and derived labels
only. Datasets are treated as immutable once constructed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import featurize

ABSTAIN = -1

TEXT = "text"
TABULAR = "tabular"

TRAIN = "train"
VALID = "valid"
TEST = "test"

SPLITS = (TRAIN, VALID, TEST)


class DataFormatError(ValueError):
    """Raised when an input file does not match the expected schema."""


@dataclass(frozen=True)
class Instance:
    """A single example: token tuple (text) or feature vector (tabular).

    `true_label` is hidden ground truth; see the module docstring for who
    may read it.
    """

    id: int
    payload: tuple[str, ...] | np.ndarray
    true_label: int | None = None
    raw_text: str | None = None

    @property
    def tokens(self) -> tuple[str, ...]:
        if not isinstance(self.payload, tuple):
            raise ValueError("instance has no token payload")
        return self.payload

    @property
    def features(self) -> np.ndarray:
        if isinstance(self.payload, tuple):
            raise ValueError("instance has no feature payload")
        return self.payload


@dataclass(frozen=True)
class LabelFunction:
    """A keyword rule or a single-feature decision stump.

    Keyword form: fire with `target` when `word` appears among an
    instance's tokens. Stump form: fire with `target` when the `op`
    comparison of feature `feature` against `value` holds (boundary
    inclusive for both ops). Otherwise abstain with -1.
    """

    kind: str  # "keyword" | "stump"
    target: int
    word: str | None = None
    feature: int | None = None
    value: float | None = None
    op: str | None = None  # "<=" | ">="
    lf_id: int = -1

    @staticmethod
    def keyword(word: str, target: int, lf_id: int = -1) -> "LabelFunction":
        return LabelFunction(kind="keyword", target=target, word=word, lf_id=lf_id)

    @staticmethod
    def stump(feature: int, value: float, op: str, target: int, lf_id: int = -1) -> "LabelFunction":
        if op not in ("<=", ">="):
            raise ValueError(f"stump op must be '<=' or '>=', got {op!r}")
        return LabelFunction(
            kind="stump", target=target, feature=feature, value=float(value), op=op, lf_id=lf_id
        )

    def identity(self) -> tuple:
        """Equality key that ignores the assigned id."""
        if self.kind == "keyword":
            return ("keyword", self.word, self.target)
        return ("stump", self.feature, self.value, self.op, self.target)

    def with_id(self, lf_id: int) -> "LabelFunction":
        return replace(self, lf_id=lf_id)

    def describe(self) -> str:
        if self.kind == "keyword":
            return f'"{self.word}" -> {self.target}'
        sym = "<=" if self.op == "<=" else ">="
        return f"x[{self.feature}] {sym} {self.value:g} -> {self.target}"


@dataclass
class Dataset:
    """An ordered collection of instances with optional split tags.

    `split[i]` tags `instances[i]`; None means the dataset has not been
    split yet. Treated as immutable after construction.
    """

    instances: list[Instance]
    n_classes: int
    kind: str  # "text" | "tabular"
    split: list[str] | None = None
    m_feat: int | None = None
    feature_names: list[str] | None = None

    def __post_init__(self):
        ids = [inst.id for inst in self.instances]
        if len(set(ids)) != len(ids):
            raise ValueError("instance ids must be unique")
        if self.kind == TABULAR and self.m_feat is not None:
            for inst in self.instances:
                if len(inst.features) != self.m_feat:
                    raise ValueError(
                        f"instance {inst.id} has {len(inst.features)} features, expected {self.m_feat}"
                    )
        for inst in self.instances:
            if inst.true_label is not None and not (0 <= inst.true_label < self.n_classes):
                raise ValueError(f"instance {inst.id} label {inst.true_label} out of range")

    def __len__(self) -> int:
        return len(self.instances)

    def split_indices(self, tag: str) -> np.ndarray:
        """Positions (not ids) of instances in the given split."""
        if self.split is None:
            raise ValueError("dataset has not been split")
        return np.array([i for i, s in enumerate(self.split) if s == tag], dtype=int)

    def subset(self, tag: str) -> list[Instance]:
        return [self.instances[i] for i in self.split_indices(tag)]

    def true_labels(self, positions: np.ndarray | None = None) -> np.ndarray:
        """Hidden labels as an array; raises if any are missing."""
        insts = self.instances if positions is None else [self.instances[i] for i in positions]
        labels = []
        for inst in insts:
            if inst.true_label is None:
                raise ValueError(f"instance {inst.id} has no ground-truth label")
            labels.append(inst.true_label)
        return np.array(labels, dtype=int)


def apply_lf(lf: LabelFunction, x: Instance) -> int:
    """Weak label of `lf` on `x`: the LF's target class or -1 (abstain)."""
    if lf.kind == "keyword":
        if not isinstance(x.payload, tuple):
            raise ValueError("keyword LF applied to a tabular instance")
        return lf.target if lf.word in x.payload else ABSTAIN
    if lf.kind == "stump":
        if isinstance(x.payload, tuple):
            raise ValueError("stump LF applied to a text instance")
        xj = float(x.payload[lf.feature])
        if lf.op == "<=":
            return lf.target if xj <= lf.value else ABSTAIN
        return lf.target if xj >= lf.value else ABSTAIN
    raise ValueError(f"unknown LF kind {lf.kind!r}")


@dataclass
class WeakLabelMatrix:
    """n x m integer matrix of weak labels, -1 meaning abstain."""

    entries: np.ndarray
    lf_ids: list[int]

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=int)
        if self.entries.ndim != 2:
            raise ValueError("weak-label matrix must be 2-D")
        if self.entries.shape[1] != len(self.lf_ids):
            raise ValueError("column count must match the number of LFs")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def apply_lf_column(lf: LabelFunction, instances: list[Instance]) -> np.ndarray:
    """Weak labels of one LF over a list of instances."""
    return np.array([apply_lf(lf, x) for x in instances], dtype=int)


def build_label_matrix(lfs: list[LabelFunction], d: Dataset) -> WeakLabelMatrix:
    """Apply every LF to every instance; zero LFs give an n x 0 matrix."""
    n = len(d.instances)
    if not lfs:
        return WeakLabelMatrix(entries=np.zeros((n, 0), dtype=int), lf_ids=[])
    cols = [apply_lf_column(lf, d.instances) for lf in lfs]
    return WeakLabelMatrix(entries=np.stack(cols, axis=1), lf_ids=[lf.lf_id for lf in lfs])


class FastApplier:
    """Precomputed structures for applying many LFs over a fixed instance list.

    Produces columns identical to apply_lf_column; worth it because the
    session loop applies every new LF across the whole dataset.
    """

    def __init__(self, instances: list[Instance], kind: str):
        self.n = len(instances)
        self.kind = kind
        if kind == TEXT:
            postings: dict[str, list[int]] = {}
            for pos, inst in enumerate(instances):
                for tok in set(inst.payload):
                    postings.setdefault(tok, []).append(pos)
            self._postings = {t: np.array(p, dtype=int) for t, p in postings.items()}
        else:
            self._features = np.stack([inst.payload for inst in instances], axis=0)

    def column(self, lf: LabelFunction) -> np.ndarray:
        if lf.kind == "keyword":
            if self.kind != TEXT:
                raise ValueError("keyword LF applied to a tabular instance")
            col = np.full(self.n, ABSTAIN, dtype=int)
            hits = self._postings.get(lf.word)
            if hits is not None:
                col[hits] = lf.target
            return col
        if self.kind != TABULAR:
            raise ValueError("stump LF applied to a text instance")
        vals = self._features[:, lf.feature]
        fires = vals <= lf.value if lf.op == "<=" else vals >= lf.value
        return np.where(fires, lf.target, ABSTAIN)


def lf_coverage(lf: LabelFunction, d: Dataset) -> float:
    """Fraction of train-split instances the LF does not abstain on."""
    train = d.subset(TRAIN)
    if not train:
        raise ValueError("dataset has an empty train split")
    fired = sum(1 for x in train if apply_lf(lf, x) != ABSTAIN)
    return fired / len(train)


def split_dataset(
    d: Dataset, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1), seed: int = 0
) -> Dataset:
    """Tag instances train/valid/test by a seeded shuffle.

    Counts are floor(n * ratio) per split with remainders assigned to
    train first, then valid, then test. The same seed always produces
    the same split.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")
    n = len(d.instances)
    if n < 3:
        raise ValueError(f"need at least 3 instances to split, got {n}")
    counts = [int(np.floor(n * r)) for r in ratios]
    for i in range(n - sum(counts)):
        counts[i % 3] += 1
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    tags = [""] * n
    start = 0
    for tag, count in zip(SPLITS, counts):
        for pos in order[start : start + count]:
            tags[pos] = tag
        start += count
    return Dataset(
        instances=d.instances,
        n_classes=d.n_classes,
        kind=d.kind,
        split=tags,
        m_feat=d.m_feat,
        feature_names=d.feature_names,
    )


def _parse_label(value, line_no: int, n_classes: int = 2) -> int:
    try:
        label = int(value)
    except (TypeError, ValueError):
        raise DataFormatError(f"line {line_no}: label {value!r} is not an integer") from None
    if not (0 <= label < n_classes):
        raise DataFormatError(f"line {line_no}: label {label} outside 0..{n_classes - 1}")
    return label


def _open_dataset(path: str | Path, **kwargs):
    try:
        return open(path, encoding="utf-8", **kwargs)
    except OSError as exc:
        raise DataFormatError(f"cannot read dataset {path}: {exc.strerror or exc}") from None


def load_text_jsonl(path: str | Path) -> Dataset:
    """Load a JSON-lines text dataset: {"id": int, "text": str, "label": 0|1}."""
    instances: list[Instance] = []
    with _open_dataset(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"line {line_no}: invalid JSON ({exc.msg})") from None
            if not isinstance(row, dict) or "id" not in row or "text" not in row or "label" not in row:
                raise DataFormatError(f"line {line_no}: expected keys id, text, label")
            if not isinstance(row["text"], str):
                raise DataFormatError(f"line {line_no}: text must be a string")
            label = _parse_label(row["label"], line_no)
            try:
                inst_id = int(row["id"])
            except (TypeError, ValueError):
                raise DataFormatError(f"line {line_no}: id {row['id']!r} is not an integer") from None
            instances.append(
                Instance(
                    id=inst_id,
                    payload=tuple(featurize.tokenize(row["text"])),
                    true_label=label,
                    raw_text=row["text"],
                )
            )
    if not instances:
        raise DataFormatError(f"{path}: no instances found")
    return Dataset(instances=instances, n_classes=2, kind=TEXT)


def load_tabular_csv(path: str | Path) -> Dataset:
    """Load a CSV tabular dataset: numeric feature columns, then a "label" column."""
    instances: list[Instance] = []
    with _open_dataset(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if not header or header[-1].strip() != "label":
            raise DataFormatError(f"{path}: last CSV column must be named 'label'")
        feature_names = [h.strip() for h in header[:-1]]
        m_feat = len(feature_names)
        if m_feat == 0:
            raise DataFormatError(f"{path}: no feature columns")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != m_feat + 1:
                raise DataFormatError(
                    f"line {line_no}: expected {m_feat + 1} cells, got {len(row)}"
                )
            try:
                values = np.array([float(v) for v in row[:-1]])
            except ValueError:
                raise DataFormatError(f"line {line_no}: non-numeric feature cell") from None
            label = _parse_label(row[-1].strip(), line_no)
            instances.append(Instance(id=len(instances), payload=values, true_label=label))
    if not instances:
        raise DataFormatError(f"{path}: no instances found")
    return Dataset(
        instances=instances,
        n_classes=2,
        kind=TABULAR,
        m_feat=m_feat,
        feature_names=feature_names,
    )


def make_synthetic_text(
    n: int,
    vocab_size: int = 160,
    n_signal_words: int = 8,
    n_trap_words: int = 6,
    flip_noise: float = 0.05,
    trap_acc: float = 0.65,
    seed: int = 0,
    doc_len: tuple[int, int] = (8, 16),
    signal_rate: float = 0.35,
    trap_rate: float = 0.2,
) -> Dataset:
    """Two-class synthetic corpus with planted signal and trap keywords.

    Each token of a class-y document is, independently: a signal word
    with probability `signal_rate` (drawn from class y's signal set, or
    the other class's with probability `flip_noise`); a trap word with
    probability `trap_rate` (from class y's trap set with probability
    `trap_acc`, else the other side's); otherwise a uniform background
    word. Signal keywords make near-clean rules; trap keywords make
    rules accurate enough to be offered by a rushed user yet poor enough
    to pollute aggregation, which is what LF selection must detect.
    Labels alternate, so classes are balanced within one instance.
    """
    if n < 30:
        raise ValueError(f"n must be >= 30, got {n}")
    if n_signal_words < 2:
        raise ValueError(f"n_signal_words must be >= 2, got {n_signal_words}")
    if n_trap_words < 0:
        raise ValueError(f"n_trap_words must be >= 0, got {n_trap_words}")
    if n_trap_words == 0 and trap_rate != 0.0:
        raise ValueError("trap_rate must be 0 when there are no trap words")
    if vocab_size <= 2 * (n_signal_words + n_trap_words) + 1:
        raise ValueError("vocab_size must leave room for background words")
    for name, v in (("flip_noise", flip_noise), ("trap_acc", trap_acc)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    if signal_rate < 0 or trap_rate < 0 or signal_rate + trap_rate > 1.0:
        raise ValueError("signal_rate and trap_rate must be non-negative and sum to <= 1")
    rng = np.random.default_rng(seed)
    words = [f"w{i:04d}" for i in range(vocab_size)]
    n_sig, n_trap = n_signal_words, n_trap_words
    signal = [words[:n_sig], words[n_sig : 2 * n_sig]]
    traps = [
        words[2 * n_sig : 2 * n_sig + n_trap],
        words[2 * n_sig + n_trap : 2 * n_sig + 2 * n_trap],
    ]
    background = words[2 * n_sig + 2 * n_trap :]
    instances = []
    for i in range(n):
        y = i % 2
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        tokens = []
        for _ in range(length):
            u = rng.random()
            if u < signal_rate:
                source = 1 - y if rng.random() < flip_noise else y
                tokens.append(signal[source][rng.integers(n_sig)])
            elif u < signal_rate + trap_rate:
                source = y if rng.random() < trap_acc else 1 - y
                tokens.append(traps[source][rng.integers(n_trap)])
            else:
                tokens.append(background[rng.integers(len(background))])
        instances.append(
            Instance(id=i, payload=tuple(tokens), true_label=y, raw_text=" ".join(tokens))
        )
    return Dataset(instances=instances, n_classes=2, kind=TEXT)


def make_synthetic_tabular(
    n: int,
    m_feat: int = 8,
    cluster_sep: float = 2.0,
    seed: int = 0,
) -> Dataset:
    """Two Gaussian clusters whose means differ by `cluster_sep` per feature."""
    if n < 30:
        raise ValueError(f"n must be >= 30, got {n}")
    if m_feat < 1:
        raise ValueError(f"m_feat must be >= 1, got {m_feat}")
    rng = np.random.default_rng(seed)
    instances = []
    for i in range(n):
        y = i % 2
        center = cluster_sep / 2.0 if y == 1 else -cluster_sep / 2.0
        values = rng.normal(loc=center, scale=1.0, size=m_feat)
        instances.append(Instance(id=i, payload=values, true_label=y))
    return Dataset(
        instances=instances,
        n_classes=2,
        kind=TABULAR,
        m_feat=m_feat,
        feature_names=[f"f{j}" for j in range(m_feat)],
    )
