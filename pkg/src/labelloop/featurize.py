"""Feature extraction for text and tabular data.

Text goes through a lowercase alphanumeric tokenizer, a train-split
vocabulary capped by document frequency, and smoothed TF-IDF with
L2-normalised rows. Tabular columns are standardised with train-split
moments. Nothing in this module reads labels, and vocabulary / idf /
moments are always derived from the train split alone.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

_SPLIT_RE = re.compile(r"[^0-9a-z]+")

MIN_TOKEN_LEN = 2


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop tokens shorter than 2.

    Order and duplicates are preserved; the empty string yields [].
    """
    return [t for t in _SPLIT_RE.split(text.lower()) if len(t) >= MIN_TOKEN_LEN]


@dataclass(frozen=True)
class Vocabulary:
    """Token-to-column mapping built from the train split.

    `index` assigns dense column indices in [0, len(vocab)); `doc_freq`
    holds train document frequencies for every kept token; `n_docs` is
    the number of train documents the vocabulary was built from.
    """

    index: dict[str, int]
    doc_freq: dict[str, int]
    n_docs: int

    def __len__(self) -> int:
        return len(self.index)

    def idf(self, token: str) -> float:
        """Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1."""
        df = self.doc_freq[token]
        return math.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0


def build_vocab(train_corpus: list[list[str]], max_size: int = 1000) -> Vocabulary:
    """Keep the `max_size` tokens with highest document frequency.

    Ties are broken lexicographically. Raises ValueError on an empty
    corpus or a corpus with no tokens at all.
    """
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    if not train_corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    df: dict[str, int] = {}
    for tokens in train_corpus:
        for tok in set(tokens):
            df[tok] = df.get(tok, 0) + 1
    if not df:
        raise ValueError("corpus contains no tokens")
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:max_size]
    index = {tok: i for i, (tok, _) in enumerate(ranked)}
    return Vocabulary(index=index, doc_freq=dict(ranked), n_docs=len(train_corpus))


def tfidf(corpus: list[list[str]], vocab: Vocabulary) -> np.ndarray:
    """TF-IDF matrix for `corpus` under a train-built vocabulary.

    tf is the raw in-document count, idf = ln((1+N)/(1+df)) + 1 with N
    the train document count. Rows are L2-normalised; rows with no
    vocabulary token stay all-zero.
    """
    n, d = len(corpus), len(vocab)
    X = np.zeros((n, d))
    idf = np.empty(d)
    for tok, j in vocab.index.items():
        idf[j] = vocab.idf(tok)
    for i, tokens in enumerate(corpus):
        for tok in tokens:
            j = vocab.index.get(tok)
            if j is not None:
                X[i, j] += 1.0
    X *= idf
    norms = np.linalg.norm(X, axis=1)
    nonzero = norms > 0
    X[nonzero] /= norms[nonzero, None]
    return X


def standardize_tabular(train_matrix: np.ndarray, apply_matrix: np.ndarray) -> np.ndarray:
    """Standardise `apply_matrix` columns with train-split mean and std.

    Columns whose train std is below 1e-12 are zeroed out.
    """
    train_matrix = np.asarray(train_matrix, dtype=float)
    apply_matrix = np.asarray(apply_matrix, dtype=float)
    if train_matrix.shape[1] != apply_matrix.shape[1]:
        raise ValueError("column counts of train and apply matrices differ")
    mean = train_matrix.mean(axis=0)
    std = train_matrix.std(axis=0)
    out = apply_matrix - mean
    degenerate = std < 1e-12
    safe = np.where(degenerate, 1.0, std)
    out /= safe
    out[:, degenerate] = 0.0
    return out
