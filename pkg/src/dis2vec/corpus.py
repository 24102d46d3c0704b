"""Text ingestion: normalization, the word table, subsampling and pair streams."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyCorpus

_SENTENCE_END = re.compile(r"[.!?]")
# letters/digits, optionally joined by single internal hyphens
_TOKEN = re.compile(r"[^\W_]+(?:-[^\W_]+)*")

DEFAULT_MIN_COUNT = 5
DEFAULT_SUBSAMPLE = 1e-5


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and return its tokens, ignoring sentence punctuation."""
    return _TOKEN.findall(text.lower())


def normalize(raw_text: str, vocab=None) -> list[list[str]]:
    """Split raw text into sentences of normalized tokens.

    Sentences end at ``.``, ``!`` or ``?``; empty sentences are dropped. When
    ``vocab`` is given, its multi-word terms are joined into single
    underscore tokens.
    """
    sentences = []
    for chunk in _SENTENCE_END.split(raw_text):
        tokens = tokenize(chunk)
        if not tokens:
            continue
        if vocab is not None:
            tokens = vocab.join_phrases(tokens)
        sentences.append(tokens)
    return sentences


def read_corpus(path, pretokenized: bool = False, vocab=None) -> list[list[str]]:
    """Read a UTF-8 corpus file.

    Raw mode treats each line as a document and runs :func:`normalize` on it.
    Pre-tokenized mode takes one sentence per line with space-separated
    tokens, used verbatim apart from phrase joining.
    """
    sentences: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if pretokenized:
                tokens = line.split()
                if tokens:
                    if vocab is not None:
                        tokens = vocab.join_phrases(tokens)
                    sentences.append(tokens)
            else:
                sentences.extend(normalize(line, vocab))
    return sentences


@dataclass
class WordTable:
    """Word <-> id mapping with corpus counts, shared by words and contexts."""

    words: list[str]
    counts: np.ndarray
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.words) != len(self.counts):
            raise ValueError("words and counts differ in length")
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate surface forms in word table")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    @property
    def total_tokens(self) -> int:
        return int(self.counts.sum())

    def id(self, word: str) -> int:
        return self.index[word]

    def count(self, word: str) -> int:
        return int(self.counts[self.index[word]])

    def entries(self) -> list[tuple[str, int, int]]:
        return [(w, i, int(c)) for i, (w, c) in enumerate(zip(self.words, self.counts))]


def build_word_table(sentences: Iterable[Sequence[str]], min_count: int = DEFAULT_MIN_COUNT) -> WordTable:
    """Count tokens and keep those seen at least ``min_count`` times.

    Ids follow descending count, ties broken lexicographically.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counter: Counter[str] = Counter()
    for sentence in sentences:
        counter.update(sentence)
    kept = sorted(((w, c) for w, c in counter.items() if c >= min_count), key=lambda wc: (-wc[1], wc[0]))
    if not kept:
        raise EmptyCorpus(f"no word occurs at least {min_count} times")
    return WordTable([w for w, _ in kept], np.array([c for _, c in kept], dtype=np.int64))


@dataclass
class TokenStream:
    """Sentences of word ids stored flat, with ``offsets[i]:offsets[i+1]`` per sentence."""

    tokens: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        self.tokens = np.ascontiguousarray(self.tokens, dtype=np.int32)
        self.offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)

    @classmethod
    def from_sentences(cls, sentences: Iterable[Sequence[int]]) -> "TokenStream":
        flat: list[int] = []
        offsets = [0]
        for s in sentences:
            flat.extend(s)
            offsets.append(len(flat))
        return cls(np.array(flat, dtype=np.int32), np.array(offsets, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.offsets) - 1

    def __iter__(self) -> Iterator[np.ndarray]:
        for i in range(len(self)):
            yield self.tokens[self.offsets[i]:self.offsets[i + 1]]

    def sentences(self) -> list[list[int]]:
        return [s.tolist() for s in self]

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)


def encode(sentences: Iterable[Sequence[str]], table: WordTable) -> TokenStream:
    """Map tokens to ids, dropping words outside the table and sentences left empty."""
    index = table.index
    encoded = []
    for sentence in sentences:
        ids = [index[t] for t in sentence if t in index]
        if ids:
            encoded.append(ids)
    return TokenStream.from_sentences(encoded)


def keep_probabilities(table: WordTable, t: float) -> np.ndarray:
    """Per-id retention probability ``min(1, sqrt(t / f(w)))``."""
    if t <= 0:
        raise ValueError("subsample threshold must be positive")
    freq = table.counts / table.total_tokens
    return np.minimum(1.0, np.sqrt(t / freq))


def subsample(stream: TokenStream, table: WordTable, t: float, rng_seed) -> TokenStream:
    """Drop each occurrence of ``w`` with probability ``max(0, 1 - sqrt(t / f(w)))``.

    Sentence boundaries are kept even when a sentence becomes empty, so
    sentence indices stay aligned with the input stream.
    """
    keep_prob = keep_probabilities(table, t)
    rng = np.random.default_rng(rng_seed)
    keep = rng.random(stream.n_tokens) < keep_prob[stream.tokens]
    kept_before = np.concatenate(([0], np.cumsum(keep, dtype=np.int64)))
    return TokenStream(stream.tokens[keep], kept_before[stream.offsets])


def generate_pairs(stream: TokenStream, L: int) -> Iterator[tuple[int, int]]:
    """Yield ``(word, context)`` id pairs from a fixed symmetric window of ``L``.

    Windows are clipped at sentence boundaries and never shrunk at random.
    """
    if L < 1:
        raise ValueError("window must be >= 1")
    for sentence in stream:
        n = len(sentence)
        for i in range(n):
            w = int(sentence[i])
            for j in range(max(0, i - L), min(n, i + L + 1)):
                if j != i:
                    yield w, int(sentence[j])


def count_pairs(stream: TokenStream, L: int) -> int:
    """Number of pairs :func:`generate_pairs` would emit, in closed form."""
    n = np.diff(stream.offsets)
    # each side of a sentence of length n contributes sum_{i<n} min(i, L)
    one_side = np.where(n <= L + 1, n * (n - 1) // 2, L * (L + 1) // 2 + (n - 1 - L) * L)
    return int(2 * one_side.sum())


def load_stream(path, vocab=None, pretokenized: bool = False,
                min_count: int = DEFAULT_MIN_COUNT) -> tuple[WordTable, TokenStream]:
    """Read, count and encode a corpus file in one go."""
    sentences = read_corpus(path, pretokenized=pretokenized, vocab=vocab)
    table = build_word_table(sentences, min_count)
    return table, encode(sentences, table)
