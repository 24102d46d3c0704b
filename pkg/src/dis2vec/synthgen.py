"""Synthetic corpora with a planted disease taxonomy, plus a PMI ranking oracle."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidSpec
from .vocabulary import DISEASE_CLASSES, TASK_CATEGORIES, DomainVocabulary

_PREFIX = {
    "symptoms": "symptom",
    "exposures": "exposure",
    "transmission_methods": "method",
    "transmission_agents": "agent",
}


@dataclass
class SyntheticSpec:
    n_diseases: int = 20
    n_filler_words: int = 2000
    terms_per_category: int = 10
    true_per_category: int = 2
    beta: float = 0.9
    n_sentences: int = 50_000
    min_length: int = 8
    max_length: int = 14
    zipf_exponent: float = 1.0
    terms_per_sentence: int = 1
    seed: int = 0

    def validate(self):
        if self.n_diseases < 1 or self.n_sentences < 1 or self.n_filler_words < 0:
            raise InvalidSpec("n_diseases and n_sentences must be >= 1, n_filler_words >= 0")
        if not 1 <= self.true_per_category < self.terms_per_category:
            raise InvalidSpec("need 1 <= true_per_category < terms_per_category")
        if not 0 < self.beta <= 1:
            raise InvalidSpec("beta must lie in (0, 1]")
        if self.terms_per_sentence < 1:
            raise InvalidSpec("terms_per_sentence must be >= 1")
        if not self.terms_per_sentence + 1 <= self.min_length <= self.max_length:
            raise InvalidSpec("need terms_per_sentence + 1 <= min_length <= max_length")
        if self.n_filler_words == 0 and self.max_length > self.terms_per_sentence + 1:
            raise InvalidSpec("sentences longer than disease + terms need filler words")
        n_false = self.terms_per_category - self.true_per_category
        if self.beta / self.true_per_category <= (1 - self.beta) / n_false:
            raise InvalidSpec("beta too small: a true term must be mentioned more often than a false one")


@dataclass
class SyntheticCorpus:
    spec: SyntheticSpec
    sentences: list[list[str]]
    vocabulary: dict
    annotations: list[dict]

    @property
    def text(self) -> str:
        return "".join(" ".join(s) + " .\n" for s in self.sentences)

    def truth(self) -> dict[tuple[str, str], list[str]]:
        return {(a["disease"], a["category"]): a["annotations"] for a in self.annotations}

    def write(self, directory) -> dict[str, Path]:
        """Write ``corpus.txt``, ``vocabulary.json`` and ``annotations.json`` into ``directory``."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "corpus": out / "corpus.txt",
            "vocabulary": out / "vocabulary.json",
            "annotations": out / "annotations.json",
        }
        paths["corpus"].write_text(self.text, encoding="utf-8")
        paths["vocabulary"].write_text(json.dumps(self.vocabulary, indent=1) + "\n", encoding="utf-8")
        paths["annotations"].write_text(json.dumps(self.annotations, indent=1) + "\n", encoding="utf-8")
        return paths


def disease_token(i: int) -> str:
    return f"disease{i:02d}"


def generate(spec: SyntheticSpec) -> SyntheticCorpus:
    """Sample a corpus in which every sentence names one disease and category terms.

    Each sentence picks a category uniformly; each of its
    ``terms_per_sentence`` term slots (one by default) holds, with
    probability ``beta``, a uniformly chosen planted true term of the
    disease, otherwise one of the category's other terms. Zipf-distributed
    filler words pad the sentence to a length drawn uniformly from
    ``[min_length, max_length]``; disease and terms land at random positions.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    diseases = [disease_token(i) for i in range(spec.n_diseases)]
    terms = {cat: [f"{_PREFIX[cat]}{j:02d}" for j in range(spec.terms_per_category)] for cat in TASK_CATEGORIES}
    # balanced design: cycling through a shuffled term order gives every term
    # (nearly) the same number of diseases, so term marginals stay comparable
    truth = {}
    m_true, n_terms = spec.true_per_category, spec.terms_per_category
    for cat in TASK_CATEGORIES:
        term_order = rng.permutation(n_terms)
        for r, i in enumerate(rng.permutation(spec.n_diseases)):
            picked = term_order[(r * m_true + np.arange(m_true)) % n_terms]
            truth[diseases[i], cat] = sorted(terms[cat][j] for j in picked)
    false_terms = {key: [t for t in terms[key[1]] if t not in set(true)] for key, true in truth.items()}

    fillers = [f"w{i:04d}" for i in range(spec.n_filler_words)]
    if fillers:
        zipf = 1.0 / np.arange(1, len(fillers) + 1) ** spec.zipf_exponent
        zipf /= zipf.sum()

    n, m = spec.n_sentences, spec.terms_per_sentence
    d_idx = rng.integers(0, spec.n_diseases, size=n)
    c_idx = rng.integers(0, len(TASK_CATEGORIES), size=n)
    is_true = rng.random((n, m)) < spec.beta
    pick = rng.random((n, m))
    lengths = rng.integers(spec.min_length, spec.max_length + 1, size=n)
    n_fill = lengths - 1 - m
    fill_ids = rng.choice(len(fillers), size=int(n_fill.sum()), p=zipf) if fillers else np.zeros(0, dtype=int)
    fill_at = np.concatenate(([0], np.cumsum(n_fill)))

    sentences = []
    for s in range(n):
        d = diseases[d_idx[s]]
        cat = TASK_CATEGORIES[c_idx[s]]
        named = [d]
        for slot in range(m):
            pool = truth[d, cat] if is_true[s, slot] else false_terms[d, cat]
            named.append(pool[int(pick[s, slot] * len(pool))])
        tokens = [fillers[i] for i in fill_ids[fill_at[s]:fill_at[s + 1]]]
        positions = rng.choice(lengths[s], size=m + 1, replace=False)
        # ascending inserts land every token at its drawn final position
        for pos, tok in sorted(zip(positions, named)):
            tokens.insert(pos, tok)
        sentences.append(tokens)

    classes = {d: DISEASE_CLASSES[i % len(DISEASE_CLASSES)] for i, d in enumerate(diseases)}
    vocabulary = {
        "terms": [{"term": t, "categories": [cat]} for cat in TASK_CATEGORIES for t in terms[cat]],
        "diseases": [{"name": d, "class": classes[d]} for d in diseases],
    }
    annotations = [
        {"disease": d, "category": cat, "annotations": truth[d, cat]}
        for d in diseases for cat in TASK_CATEGORIES
    ]
    return SyntheticCorpus(spec, sentences, vocabulary, annotations)


def true_mention_fraction(corpus: SyntheticCorpus) -> float:
    """Share of sentences mentioning a planted true term of their disease."""
    diseases = {d["name"] for d in corpus.vocabulary["diseases"]}
    true_sets = {}
    for a in corpus.annotations:
        true_sets.setdefault(a["disease"], set()).update(a["annotations"])
    hits = 0
    for s in corpus.sentences:
        d = next(t for t in s if t in diseases)
        hits += any(t in true_sets[d] for t in s)
    return hits / len(corpus.sentences)


@dataclass
class CooccurrenceCounts:
    pair: Counter
    marginal: Counter
    total: int


def cooccurrence(sentences: Sequence[Sequence[str]], targets, window: int = 5) -> CooccurrenceCounts:
    """Exact windowed pair counts for target words, plus context marginals over all pairs."""
    targets = set(targets)
    pair: Counter = Counter()
    marginal: Counter = Counter()
    total = 0
    for s in sentences:
        n = len(s)
        for i, w in enumerate(s):
            lo, hi = max(0, i - window), min(n, i + window + 1)
            marginal[w] += hi - lo - 1
            total += hi - lo - 1
            if w in targets:
                for j in range(lo, hi):
                    if j != i:
                        pair[w, s[j]] += 1
    return CooccurrenceCounts(pair, marginal, total)


def pmi(counts: CooccurrenceCounts, w: str, c: str, unseen_count: float = 0.0) -> float:
    """``log(#(w,c) |D| / (#(w) #(c)))``.

    Pairs never seen count as ``unseen_count`` co-occurrences; the result is
    ``-inf`` when that is 0 or when either word never occurs.
    """
    joint = counts.pair.get((w, c), 0) or unseen_count
    if joint == 0 or counts.marginal[w] == 0 or counts.marginal[c] == 0:
        return -math.inf
    return math.log(joint * counts.total / (counts.marginal[w] * counts.marginal[c]))


def pmi_oracle(sentences: Sequence[Sequence[str]], vocab: DomainVocabulary, window: int = 5,
               diseases: Optional[Sequence[str]] = None,
               unseen_count: float = 0.0) -> dict[tuple[str, str], list[tuple[str, float]]]:
    """Rank every category's terms by PMI with each disease (descending, ties lexicographic)."""
    diseases = list(diseases) if diseases is not None else vocab.disease_names()
    counts = cooccurrence(sentences, diseases, window)
    ranked = {}
    for d in diseases:
        for cat in TASK_CATEGORIES:
            scores = [(t, pmi(counts, d, t, unseen_count)) for t in vocab.terms_in(cat) if t != d]
            ranked[d, cat] = sorted(scores, key=lambda ts: (-ts[1], ts[0]))
    return ranked


def spec_from_dict(d: dict) -> SyntheticSpec:
    return SyntheticSpec(**{k: v for k, v in d.items() if k in asdict(SyntheticSpec())})



def oracle_accuracy(ranked: dict[tuple[str, str], list[tuple[str, float]]],
                    truth: dict[tuple[str, str], list[str]]) -> float:
    """Mean min-max accuracy of oracle rankings against the planted terms.

    Terms with a non-finite score are treated like words missing from an
    embedding: they leave the candidate set and earn nothing.
    """
    from .taxonomy import minmax_accuracy

    accs = []
    for key, gold in truth.items():
        scores = {t: s for t, s in ranked[key] if math.isfinite(s)}
        accs.append(minmax_accuracy(scores, gold) if scores else 0.0)
    return float(np.mean(accs))
