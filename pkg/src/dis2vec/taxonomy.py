"""Cosine comparator: rank category terms per disease and score them against annotations."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DataError, DiseaseNotInEmbeddings, NoCandidates, ParseError, ZeroVector
from .vocabulary import TASK_CATEGORIES, DomainVocabulary, normalize_term

DEFAULT_TOP_N = 5


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cosine of a zero vector is undefined")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


@dataclass
class TaxonomyQuery:
    disease: str
    category: str
    candidates: list[str]
    annotations: list[str]

    def __post_init__(self):
        missing = set(self.annotations) - set(self.candidates)
        if missing:
            raise ParseError(f"annotations {sorted(missing)} of {self.disease}/{self.category} are not candidates")


def make_queries(vocab: DomainVocabulary, annotations: Sequence[Mapping]) -> list[TaxonomyQuery]:
    """Queries whose candidates are every vocabulary term of the category except the disease itself.

    An entry may carry its own ``candidates`` list to override that default.
    """
    queries = []
    for item in annotations:
        try:
            disease = normalize_term(item["disease"])
            category = item["category"]
            gold = [normalize_term(t) for t in item["annotations"]]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad annotation entry {item!r}") from exc
        if category not in TASK_CATEGORIES:
            raise ParseError(f"unknown task category {category!r}")
        if "candidates" in item:
            candidates = [normalize_term(t) for t in item["candidates"]]
        else:
            candidates = [t for t in vocab.terms_in(category) if t != disease]
        queries.append(TaxonomyQuery(disease, category, candidates, gold))
    return queries


def load_annotations(path, vocab: DomainVocabulary) -> list[TaxonomyQuery]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("queries", [])
    if not isinstance(doc, list):
        raise ParseError(f"{path}: expected a list of annotation entries")
    return make_queries(vocab, doc)


def minmax_accuracy(scores: Mapping[str, float], annotations: Sequence[str]) -> float:
    """Mean min-max-normalized score of the annotated terms among all candidate scores.

    Annotations absent from ``scores`` count as 0, as does every term when all
    candidate scores are equal.
    """
    if not scores:
        raise NoCandidates("no candidate has a score")
    if not annotations:
        raise NoCandidates("query has no annotated terms")
    lo, hi = min(scores.values()), max(scores.values())
    span = hi - lo
    total = 0.0
    for term in annotations:
        if term in scores and span > 0:
            total += min(1.0, max(0.0, (scores[term] - lo) / span))
    return total / len(annotations)


@dataclass
class QueryResult:
    query: TaxonomyQuery
    ranked: list[tuple[str, float]]
    missing: list[str]
    accuracy: float

    @property
    def missing_annotations(self) -> list[str]:
        return [t for t in self.query.annotations if t in set(self.missing)]

    def top(self, n: int = DEFAULT_TOP_N) -> list[str]:
        return [t for t, _ in self.ranked[:n]]


def _scores(query: TaxonomyQuery, emb) -> tuple[dict[str, float], list[str]]:
    if query.disease not in emb:
        raise DiseaseNotInEmbeddings(f"{query.disease!r} has no embedding")
    d = emb.vector(query.disease)
    scores, missing = {}, []
    for term in query.candidates:
        if term in emb:
            scores[term] = cosine(d, emb.vector(term))
        else:
            missing.append(term)
    return scores, missing


def rank_candidates(query: TaxonomyQuery, emb) -> tuple[list[tuple[str, float]], list[str]]:
    """Candidates present in ``emb`` by descending cosine to the disease, plus the missing ones."""
    scores, missing = _scores(query, emb)
    return sorted(scores.items(), key=lambda ts: (-ts[1], ts[0])), missing


def evaluate_query(query: TaxonomyQuery, emb) -> QueryResult:
    scores, missing = _scores(query, emb)
    ranked = sorted(scores.items(), key=lambda ts: (-ts[1], ts[0]))
    return QueryResult(query, ranked, missing, minmax_accuracy(scores, query.annotations))


def accuracy(query: TaxonomyQuery, emb) -> float:
    return evaluate_query(query, emb).accuracy


@dataclass
class ReportEntry:
    disease: str
    category: str
    disease_class: Optional[str]
    accuracy: Optional[float]
    top: list[str] = field(default_factory=list)
    ranked: list[tuple[str, float]] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class TaxonomyReport:
    entries: list[ReportEntry]
    category_means: dict[str, float]
    class_means: dict[str, dict[str, float]]
    overall: float

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "category_means": self.category_means,
            "class_means": self.class_means,
            "entries": [
                {
                    "disease": e.disease,
                    "category": e.category,
                    "class": e.disease_class,
                    "accuracy": e.accuracy,
                    "top": e.top,
                    "ranked": [{"term": t, "cosine": s} for t, s in e.ranked],
                    "missing": e.missing,
                    "error": e.error,
                }
                for e in self.entries
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    def write_table(self, path) -> None:
        """Flat ``disease, category, accuracy, class`` table (tab separated)."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            out = csv.writer(fh, delimiter="\t", lineterminator="\n")
            out.writerow(["disease", "category", "accuracy", "class"])
            for e in self.entries:
                acc = "" if e.accuracy is None else f"{e.accuracy:.6f}"
                out.writerow([e.disease, e.category, acc, e.disease_class or ""])


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else math.nan


def summarize(entries: Sequence[ReportEntry]) -> TaxonomyReport:
    """Per-category means over diseases, per (class, category) means, and the mean of category means."""
    ok = [e for e in entries if e.accuracy is not None]
    categories = [c for c in TASK_CATEGORIES if any(e.category == c for e in ok)]
    category_means = {c: _mean(e.accuracy for e in ok if e.category == c) for c in categories}
    class_means: dict[str, dict[str, float]] = {}
    for label in sorted({e.disease_class for e in ok if e.disease_class}):
        class_means[label] = {
            c: _mean(e.accuracy for e in ok if e.category == c and e.disease_class == label)
            for c in categories
            if any(e.category == c and e.disease_class == label for e in ok)
        }
    overall = _mean(category_means.values())
    return TaxonomyReport(list(entries), category_means, class_means, overall)


def report(queries: Sequence[TaxonomyQuery], emb, vocab: Optional[DomainVocabulary] = None,
           top_n: int = DEFAULT_TOP_N) -> TaxonomyReport:
    """Score every query; failures become per-entry errors instead of aborting the batch."""
    if not queries:
        raise NoCandidates("no queries to report on")
    classes = vocab.diseases if vocab is not None else {}
    entries = []
    for q in queries:
        label = classes.get(q.disease)
        try:
            res = evaluate_query(q, emb)
        except DataError as exc:
            entries.append(ReportEntry(q.disease, q.category, label, None, error=f"{type(exc).__name__}: {exc}"))
            continue
        entries.append(ReportEntry(q.disease, q.category, label, res.accuracy, res.top(top_n), res.ranked, res.missing))
    return summarize(entries)
