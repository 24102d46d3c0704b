"""The domain vocabulary: disease terms, their categories, and pair categorization."""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .corpus import WordTable, tokenize
from .errors import EmptyVocabulary, InvalidCategory, ParseError

DISEASE_NAME = "disease_name"
TASK_CATEGORIES = ("symptoms", "exposures", "transmission_methods", "transmission_agents")
CATEGORIES = (DISEASE_NAME,) + TASK_CATEGORIES
DISEASE_CLASSES = ("emerging", "endemic", "rare")


class PairCategory(enum.IntEnum):
    """Pair types by vocabulary membership; values match the training kernels."""

    DD = 0
    NN = 1
    MIXED = 2


def normalize_term(term: str) -> str:
    """Normalize a vocabulary term the way corpus tokens are, joining words with ``_``."""
    return "_".join(tokenize(term))


@dataclass(frozen=True)
class DomainVocabulary:
    terms: Mapping[str, frozenset]
    diseases: Mapping[str, str]
    _phrases: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        phrases: dict[str, list[tuple[str, ...]]] = {}
        for term in self.terms:
            parts = tuple(term.split("_"))
            if len(parts) > 1:
                phrases.setdefault(parts[0], []).append(parts)
        for starts in phrases.values():
            starts.sort(key=len, reverse=True)
        object.__setattr__(self, "_phrases", phrases)

    @classmethod
    def empty(cls) -> "DomainVocabulary":
        return cls({}, {})

    @classmethod
    def from_entries(cls, terms: Sequence[tuple[str, Sequence[str]]] = (), diseases: Mapping[str, str] | None = None):
        """Build a vocabulary from ``(term, categories)`` entries and a disease->class map.

        Terms are normalized; repeated terms merge their categories. Every
        disease is added as a term with category ``disease_name``.
        """
        merged: dict[str, set] = {}
        for raw, cats in terms:
            term = normalize_term(raw)
            if not term:
                raise ParseError(f"term {raw!r} is empty after normalization")
            cats = list(cats)
            if not cats:
                raise ParseError(f"term {raw!r} has no categories")
            for cat in cats:
                if cat not in CATEGORIES:
                    raise InvalidCategory(f"unknown category {cat!r} for term {raw!r}")
            merged.setdefault(term, set()).update(cats)
        classes: dict[str, str] = {}
        for raw, label in (diseases or {}).items():
            name = normalize_term(raw)
            if not name:
                raise ParseError(f"disease {raw!r} is empty after normalization")
            if label not in DISEASE_CLASSES:
                raise InvalidCategory(f"unknown disease class {label!r} for {raw!r}")
            classes[name] = label
            merged.setdefault(name, set()).add(DISEASE_NAME)
        return cls({t: frozenset(c) for t, c in merged.items()}, classes)

    def __contains__(self, token: str) -> bool:
        return token in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def terms_in(self, category: str) -> list[str]:
        """Sorted terms tagged with ``category``."""
        return sorted(t for t, cats in self.terms.items() if category in cats)

    def disease_names(self) -> list[str]:
        return self.terms_in(DISEASE_NAME)

    def join_phrases(self, sentence: Sequence[str]) -> list[str]:
        return join_phrases(sentence, self)

    def mask(self, table: WordTable) -> np.ndarray:
        """Boolean membership in V for every id of ``table``."""
        return np.array([w in self.terms for w in table.words], dtype=bool)

    def to_dict(self) -> dict:
        return {
            "terms": [{"term": t, "categories": sorted(c)} for t, c in sorted(self.terms.items())],
            "diseases": [{"name": d, "class": k} for d, k in sorted(self.diseases.items())],
        }


def parse_vocabulary(doc) -> DomainVocabulary:
    """Validate a decoded vocabulary document (``terms`` and ``diseases`` lists)."""
    if not isinstance(doc, dict):
        raise ParseError("vocabulary document must be an object")
    raw_terms = doc.get("terms", [])
    raw_diseases = doc.get("diseases", [])
    if not isinstance(raw_terms, list) or not isinstance(raw_diseases, list):
        raise ParseError("'terms' and 'diseases' must be lists")
    entries = []
    for item in raw_terms:
        try:
            term, cats = item["term"], item["categories"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad term entry {item!r}") from exc
        if not isinstance(term, str) or not isinstance(cats, list):
            raise ParseError(f"bad term entry {item!r}")
        entries.append((term, cats))
    diseases = {}
    for item in raw_diseases:
        try:
            name, label = item["name"], item["class"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad disease entry {item!r}") from exc
        if not isinstance(name, str):
            raise ParseError(f"bad disease entry {item!r}")
        diseases[name] = label
    vocab = DomainVocabulary.from_entries(entries, diseases)
    if not len(vocab):
        raise EmptyVocabulary("vocabulary has no terms")
    return vocab


def load_vocabulary(path) -> DomainVocabulary:
    """Load a JSON vocabulary file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_vocabulary(doc)


def bundled_vocabulary() -> DomainVocabulary:
    """The shipped example vocabulary (partial: a starting point, not a complete term list)."""
    text = resources.files("dis2vec").joinpath("data/vocabulary.json").read_text(encoding="utf-8")
    return parse_vocabulary(json.loads(text))


def join_phrases(sentence: Sequence[str], vocab: DomainVocabulary) -> list[str]:
    """Replace runs of tokens spelling a multi-word term by the joined term.

    Scans left to right; at each position the longest matching term wins.
    """
    phrases = vocab._phrases
    out = []
    i, n = 0, len(sentence)
    while i < n:
        tok = sentence[i]
        for parts in phrases.get(tok, ()):
            span = len(parts)
            if i + span <= n and tuple(sentence[i:i + span]) == parts:
                out.append("_".join(parts))
                i += span
                break
        else:
            out.append(tok)
            i += 1
    return out


def categorize(w: int, c: int, vocab: DomainVocabulary, table: WordTable) -> PairCategory:
    in_w = table.words[w] in vocab.terms
    in_c = table.words[c] in vocab.terms
    if in_w and in_c:
        return PairCategory.DD
    if in_w or in_c:
        return PairCategory.MIXED
    return PairCategory.NN


def category_histogram(vocab: DomainVocabulary) -> dict[str, float]:
    """Share of task-category assignments among non-disease terms."""
    counts: Counter[str] = Counter()
    for cats in vocab.terms.values():
        for cat in cats:
            if cat != DISEASE_NAME:
                counts[cat] += 1
    total = sum(counts.values())
    if not total:
        return {cat: 0.0 for cat in TASK_CATEGORIES}
    return {cat: counts[cat] / total for cat in TASK_CATEGORIES}
