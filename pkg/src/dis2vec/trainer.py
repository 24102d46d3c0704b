"""Skip-gram negative sampling and its vocabulary-driven variants."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .corpus import TokenStream, WordTable, count_pairs, subsample
from .errors import EmptyCorpus, EmptySupport, NonFiniteUpdate, ParseError
from .sampler import ALL, IN_VOCAB, NOT_IN_VOCAB, UnigramTable, build_table, draw, draw_dd_negative
from .vocabulary import DomainVocabulary, PairCategory

log = logging.getLogger(__name__)

MODES = ("sgns", "dis2vec_sample", "dis2vec_objective", "dis2vec_combined")
_MODE_CODES = {m: i for i, m in enumerate(MODES)}
VOCAB_MODES = MODES[1:]

# explored values per hyperparameter
GRID = {
    "dim": (300, 600),
    "window": (5, 10, 15),
    "negative": (1, 5, 15),
    "alpha": (0.75, 1.0),
    "pi_s": (0.3, 0.5, 0.7),
    "pi_o": (0.3, 0.5, 0.7),
}
# which grid axes each mode actually uses
MODE_PARAMS = {
    "sgns": ("dim", "window", "negative", "alpha"),
    "dis2vec_sample": ("dim", "window", "negative", "alpha", "pi_s"),
    "dis2vec_objective": ("dim", "window", "negative", "alpha", "pi_o"),
    "dis2vec_combined": ("dim", "window", "negative", "alpha", "pi_s", "pi_o"),
}


@dataclass
class TrainingConfig:
    dim: int = 300
    window: int = 5
    negative: int = 5
    alpha: float = 0.75
    pi_s: float = 0.7
    pi_o: float = 0.7
    mode: str = "sgns"
    epochs: int = 5
    lr0: float = 0.025
    lr_min: Optional[float] = None  # None -> 1e-4 * lr0
    subsample_t: Optional[float] = 1e-5  # None disables subsampling
    min_count: int = 5
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.lr_min is None:
            self.lr_min = 1e-4 * self.lr0
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dim < 1 or self.window < 1 or self.negative < 0:
            raise ValueError("dim and window must be >= 1, negative >= 0")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not (0 <= self.pi_s <= 1 and 0 <= self.pi_o <= 1):
            raise ValueError("pi_s and pi_o must lie in [0, 1]")
        if self.epochs < 1 or self.workers < 1 or self.min_count < 1:
            raise ValueError("epochs, workers and min_count must be >= 1")
        if self.lr0 <= 0 or self.lr_min < 0:
            raise ValueError("lr0 must be positive and lr_min non-negative")
        if self.subsample_t is not None and self.subsample_t <= 0:
            raise ValueError("subsample_t must be positive (or None to disable)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class TrainingHistory:
    """Per-epoch objective sums and pair counts, columns ordered DD, NN, Mixed."""

    losses: np.ndarray
    totals: np.ndarray
    counts: np.ndarray

    @property
    def epoch_losses(self) -> np.ndarray:
        return self.losses.sum(axis=1)

    def rows(self) -> list[dict]:
        out = []
        for e in range(len(self.totals)):
            row = {"epoch": e + 1, "total": float(self.totals[e])}
            for cat in PairCategory:
                row[f"loss_{cat.name.lower()}"] = float(self.losses[e, cat])
                row[f"pairs_{cat.name.lower()}"] = int(self.counts[e, cat])
            out.append(row)
        return out


@dataclass
class EmbeddingSet:
    words: list[str]
    word_vectors: np.ndarray
    context_vectors: Optional[np.ndarray] = None
    history: Optional[TrainingHistory] = field(default=None, repr=False)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.words)}

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __len__(self) -> int:
        return len(self.words)

    @property
    def dim(self) -> int:
        return self.word_vectors.shape[1]

    def vector(self, word: str) -> np.ndarray:
        return self.word_vectors[self.index[word]]

    def save(self, path) -> None:
        """Write word vectors in word2vec text format, 6 decimals per value."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(self.words)} {self.dim}\n")
            for word, row in zip(self.words, self.word_vectors):
                fh.write(word + " " + " ".join(f"{x:.6f}" for x in row) + "\n")

    @classmethod
    def load(cls, path) -> "EmbeddingSet":
        with open(path, encoding="utf-8") as fh:
            try:
                n, dim = (int(x) for x in fh.readline().split())
                words = []
                vectors = np.empty((n, dim))
                for i in range(n):
                    parts = fh.readline().rstrip("\n").split(" ")
                    if len(parts) != dim + 1:
                        raise ParseError(f"{path}: line {i + 2} has {len(parts) - 1} values, expected {dim}")
                    words.append(parts[0])
                    vectors[i] = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise ParseError(f"{path}: not a word2vec text file ({exc})") from exc
        return cls(words, vectors)


def sigmoid(x):
    """Logistic function, stable for large ``|x|``; accepts scalars or arrays."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def _apply(emb: EmbeddingSet, w: int, ctxs: Sequence[int], labels: Sequence[int], lr: float) -> float:
    ctxs = np.asarray(ctxs, dtype=np.int64)
    return K.step(emb.word_vectors, emb.context_vectors, w, ctxs, np.asarray(labels, dtype=np.int64),
                  lr, np.empty(emb.dim), np.empty(len(ctxs)))


def update_sgns_pair(w: int, c: int, emb: EmbeddingSet, k: int, lr: float,
                     negative_source: UnigramTable, rng: np.random.Generator) -> float:
    """One stochastic ascent step on ``log s(w.c) + sum_k log s(-w.c_N)``; returns the pre-update objective."""
    negs = [draw(negative_source, rng) for _ in range(k)]
    return _apply(emb, w, [c] + negs, [1] + [0] * k, lr)


def update_dd_pair(w: int, c: int, emb: EmbeddingSet, k: int, pi_s: float, lr: float,
                   t_in: UnigramTable, t_out: UnigramTable, rng: np.random.Generator) -> float:
    """As :func:`update_sgns_pair`, negatives drawn outside V with probability ``pi_s``."""
    negs = [draw_dd_negative(pi_s, t_out, t_in, rng) for _ in range(k)]
    return _apply(emb, w, [c] + negs, [1] + [0] * k, lr)


def update_nn_pair(w: int, c: int, emb: EmbeddingSet, k: int, lr: float,
                   global_table: UnigramTable, rng: np.random.Generator) -> float:
    return update_sgns_pair(w, c, emb, k, lr, global_table, rng)


def update_mixed_pair(w: int, c: int, emb: EmbeddingSet, pi_o: float, lr: float, rng: np.random.Generator) -> float:
    """Repel ``w`` and ``c`` with probability ``pi_o``, otherwise attract them. No negatives."""
    repel = rng.random() < pi_o
    return _apply(emb, w, [c], [0 if repel else 1], lr)


def init_embeddings(n_words: int, dim: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Word vectors uniform in +-0.5/dim, context vectors zero."""
    rng = np.random.default_rng(seed)
    W = rng.uniform(-0.5 / dim, 0.5 / dim, size=(n_words, dim))
    return W, np.zeros((n_words, dim))


_EMPTY_I = np.zeros(1, dtype=np.int64)
_EMPTY_F = np.ones(1)


def _table_arrays(t: Optional[UnigramTable]):
    if t is None:
        return _EMPTY_I, _EMPTY_F, _EMPTY_I
    return t.support, t.prob, t.alias


def _negative_tables(table: WordTable, vocab: DomainVocabulary, mask: np.ndarray, config: TrainingConfig):
    g = build_table(table, config.alpha, ALL)
    t_in = t_out = None
    if config.mode in ("dis2vec_sample", "dis2vec_combined") and mask.any() and config.negative > 0:
        t_in = build_table(table, config.alpha, IN_VOCAB, vocab)
        if (~mask).any():
            t_out = build_table(table, config.alpha, NOT_IN_VOCAB, vocab)
        elif config.pi_s > 0:
            raise EmptySupport("every word is in the vocabulary; nothing to draw outside it")
    return g, t_in, t_out


def _shard(epoch_streams: list[TokenStream], n_workers: int, worker: int):
    """Flatten this worker's contiguous slice of every epoch's sentences."""
    tokens, offsets, epoch_starts = [], [np.zeros(1, dtype=np.int64)], [0]
    base = 0
    n_sent = 0
    for stream in epoch_streams:
        bounds = np.linspace(0, len(stream), n_workers + 1).astype(np.int64)
        a, b = bounds[worker], bounds[worker + 1]
        lo, hi = stream.offsets[a], stream.offsets[b]
        tokens.append(stream.tokens[lo:hi])
        offsets.append(stream.offsets[a + 1:b + 1] - lo + base)
        base += hi - lo
        n_sent += b - a
        epoch_starts.append(n_sent)
    sharded = TokenStream(np.concatenate(tokens), np.concatenate(offsets))
    return sharded, np.array(epoch_starts, dtype=np.int64)


def train(stream: TokenStream, table: WordTable, vocab: Optional[DomainVocabulary], config: TrainingConfig) -> EmbeddingSet:
    """Train embeddings over ``stream`` for ``config.epochs`` passes.

    Pairs are visited in stream order and dispatched by category and mode.
    Subsampling is redrawn every epoch. With ``workers > 1`` the sentences
    of each epoch are split into contiguous shards trained concurrently
    without locks, so results are reproducible only with one worker.
    """
    config.validate()
    vocab = vocab if vocab is not None else DomainVocabulary.empty()
    if stream.n_tokens == 0:
        raise EmptyCorpus("token stream is empty")
    mask = vocab.mask(table).astype(np.bool_)
    g, t_in, t_out = _negative_tables(table, vocab, mask, config)

    epoch_streams = []
    for epoch in range(config.epochs):
        if config.subsample_t is None:
            epoch_streams.append(stream)
        else:
            epoch_streams.append(subsample(stream, table, config.subsample_t, (config.seed, epoch)))
    if sum(count_pairs(s, config.window) for s in epoch_streams) == 0:
        raise EmptyCorpus("corpus yields no (word, context) pairs")

    W, C = init_embeddings(len(table), config.dim, config.seed)
    n_workers = config.workers
    E = config.epochs
    losses = np.zeros((n_workers, E, 3))
    totals = np.zeros((n_workers, E))
    counts = np.zeros((n_workers, E, 3), dtype=np.int64)
    failures = np.full((n_workers, 4), -1, dtype=np.int64)
    statuses = [K.STATUS_OK] * n_workers

    def run(worker: int):
        shard, epoch_starts = _shard(epoch_streams, n_workers, worker)
        total = count_pairs(shard, config.window)
        if total == 0:
            return
        statuses[worker] = K.train_shard(
            W, C, shard.tokens, shard.offsets, epoch_starts, config.window, config.negative,
            _MODE_CODES[config.mode], mask, config.pi_s, config.pi_o,
            *_table_arrays(g), *_table_arrays(t_in), *_table_arrays(t_out),
            config.lr0, config.lr_min, total, (config.seed + worker) % 2**32,
            losses[worker], totals[worker], counts[worker], failures[worker])

    if n_workers == 1:
        run(0)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run, range(n_workers)))

    for worker, status in enumerate(statuses):
        if status != K.STATUS_OK:
            epoch, pair, w, c = failures[worker]
            where = f"pair ({table.words[w]}, {table.words[c]})" if w >= 0 else "end-of-epoch check"
            raise NonFiniteUpdate(f"non-finite value in epoch {epoch + 1} after {pair} updates "
                                  f"(worker {worker}, {where}); try a smaller learning rate")
    history = TrainingHistory(losses.sum(axis=0), totals.sum(axis=0), counts.sum(axis=0))
    for row in history.rows():
        log.info("epoch %(epoch)d objective %(total).4f", row)
    return EmbeddingSet(list(table.words), W, C, history)


def grid_configs(base: TrainingConfig, grid: Optional[dict] = None, modes: Sequence[str] = ("dis2vec_combined",)):
    """Cartesian product of ``grid`` over the parameters each mode uses."""
    grid = GRID if grid is None else grid
    for mode in modes:
        axes = [p for p in MODE_PARAMS[mode] if p in grid]
        for values in itertools.product(*(grid[p] for p in axes)):
            params = base.to_dict()
            params.update(dict(zip(axes, values)), mode=mode)
            yield TrainingConfig.from_dict(params)
