"""Smoothed unigram distributions for negative sampling, drawn with alias tables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import WordTable
from .errors import EmptySupport

ALL, IN_VOCAB, NOT_IN_VOCAB = "all", "in_vocab", "not_in_vocab"
DEFAULT_ALPHA = 0.75


@dataclass(frozen=True)
class UnigramTable:
    """A discrete distribution over word ids with O(1) alias sampling.

    ``prob[i]`` is the chance of keeping column ``i``; otherwise the draw
    falls through to ``alias[i]`` (both index into ``support``).
    """

    support: np.ndarray
    weights: np.ndarray
    prob: np.ndarray
    alias: np.ndarray
    alpha: float

    def __len__(self) -> int:
        return len(self.support)

    def pmf(self, n_ids: int) -> np.ndarray:
        """Dense probability vector over ``range(n_ids)``."""
        out = np.zeros(n_ids)
        out[self.support] = self.weights
        return out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cols = rng.integers(0, len(self.support), size=size)
        keep = rng.random(size) < self.prob[cols]
        return self.support[np.where(keep, cols, self.alias[cols])]


def alias_arrays(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose's alias construction for normalized ``weights``."""
    n = len(weights)
    scaled = np.asarray(weights, dtype=np.float64) * n
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s, g = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    # leftovers are 1 up to rounding
    for i in small + large:
        prob[i] = 1.0
    return prob, alias


def table_from_weights(support, raw_weights, alpha: float = 1.0) -> UnigramTable:
    support = np.asarray(support, dtype=np.int64)
    raw = np.asarray(raw_weights, dtype=np.float64)
    if len(support) == 0:
        raise EmptySupport("distribution has no support")
    if np.any(raw <= 0):
        raise ValueError("weights must be positive")
    weights = raw / math.fsum(raw)
    prob, alias = alias_arrays(weights)
    return UnigramTable(support, weights, prob, alias, alpha)


def build_table(table: WordTable, alpha: float = DEFAULT_ALPHA, restrict: str = ALL, vocab=None) -> UnigramTable:
    """Unigram distribution ``count^alpha`` over all ids, or only those in / not in ``vocab``."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    ids = np.arange(len(table))
    if restrict != ALL:
        if vocab is None:
            raise ValueError(f"restrict={restrict!r} needs a vocabulary")
        mask = vocab.mask(table)
        if restrict == IN_VOCAB:
            ids = ids[mask]
        elif restrict == NOT_IN_VOCAB:
            ids = ids[~mask]
        else:
            raise ValueError(f"unknown restriction {restrict!r}")
    if len(ids) == 0:
        raise EmptySupport(f"no word in the table satisfies restriction {restrict!r}")
    return table_from_weights(ids, table.counts[ids].astype(np.float64) ** alpha, alpha)


def draw(table: UnigramTable, rng: np.random.Generator) -> int:
    col = int(rng.integers(0, len(table.support)))
    if rng.random() >= table.prob[col]:
        col = int(table.alias[col])
    return int(table.support[col])


def draw_dd_negative(pi_s: float, t_out: UnigramTable, t_in: UnigramTable, rng: np.random.Generator) -> int:
    """One negative for a vocabulary pair: outside V with probability ``pi_s``, else inside V."""
    if rng.random() < pi_s:
        return draw(t_out, rng)
    return draw(t_in, rng)


def sample_dd_negatives(pi_s: float, t_out: UnigramTable, t_in: UnigramTable, rng: np.random.Generator, size: int):
    """Vectorized :func:`draw_dd_negative`; also returns which draws came from ``t_out``."""
    from_out = rng.random(size) < pi_s
    out = np.empty(size, dtype=np.int64)
    n_out = int(from_out.sum())
    out[from_out] = t_out.sample(rng, n_out)
    out[~from_out] = t_in.sample(rng, size - n_out)
    return out, from_out
