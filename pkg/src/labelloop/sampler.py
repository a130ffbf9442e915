"""Query selection over the unlabelled train pool.

Three strategies: passive (uniform random), uncertainty sampling on the
actively trained model's entropy, and the combined strategy that ranks
by a weighted geometric mean of both models' predictive entropies. The
weight alpha shifts emphasis between the two; uncovered instances carry
the uniform label-model vector upstream, so coverage gaps look maximally
uncertain to the combined score.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PASSIVE = "passive"
US = "us"
ADP = "adp"

STRATEGIES = (PASSIVE, US, ADP)


@dataclass
class SamplerState:
    strategy: str
    rng: np.random.Generator
    alpha: float = 0.5
    excluded: set[int] = field(default_factory=set)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")

    def mark(self, instance_id: int) -> None:
        """Exclude an id from future selection (queried or skipped)."""
        self.excluded.add(instance_id)


def entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats, with 0 * ln 0 := 0."""
    return float(entropy_rows(np.asarray(p, dtype=float)[None, :])[0])


def entropy_rows(probs: np.ndarray) -> np.ndarray:
    """Row-wise entropy of an n x C probability matrix."""
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < -1e-12):
        raise ValueError("probabilities must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(probs > 0.0, probs * np.log(probs), 0.0)
    return -terms.sum(axis=1)


def adp_score(ent_a: float, ent_l: float, alpha: float) -> float:
    """ent_a^alpha * ent_l^(1 - alpha), with 0^0 := 1."""
    return float(np.power(ent_a, alpha) * np.power(ent_l, 1.0 - alpha))


def _passive_pick(rng: np.random.Generator, pool: np.ndarray) -> int:
    return int(pool[rng.integers(len(pool))])


def select_next(
    state: SamplerState,
    ids: np.ndarray,
    al_probs: np.ndarray | None = None,
    lm_probs: np.ndarray | None = None,
) -> int:
    """Pick the next query instance id from the eligible pool.

    `ids` lists candidate train-instance ids, with al_probs/lm_probs rows
    aligned to it (required for us/adp). Ties go to the smallest id; if
    every us/adp score is exactly zero the round falls back to a passive
    draw so the argmax does not fixate on the first instance.
    """
    ids = np.asarray(ids, dtype=int)
    eligible = np.array([i not in state.excluded for i in ids], dtype=bool)
    if not eligible.any():
        raise ValueError("no eligible instances remain in the pool")
    pool = ids[eligible]
    if state.strategy == PASSIVE:
        return _passive_pick(state.rng, pool)

    if al_probs is None:
        raise ValueError(f"{state.strategy} requires model probabilities")
    al_ent = entropy_rows(np.asarray(al_probs)[eligible])
    if state.strategy == US:
        scores = al_ent
    else:
        if lm_probs is None:
            raise ValueError("adp requires label-model probabilities")
        lm_ent = entropy_rows(np.asarray(lm_probs)[eligible])
        scores = np.power(al_ent, state.alpha) * np.power(lm_ent, 1.0 - state.alpha)

    if np.all(scores == 0.0):
        return _passive_pick(state.rng, pool)
    best = scores.max()
    return int(pool[scores == best].min())
