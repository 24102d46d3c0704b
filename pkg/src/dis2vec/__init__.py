"""Domain-guided word embeddings for disease taxonomy extraction."""

from .corpus import TokenStream, WordTable, build_word_table, encode, load_stream, read_corpus
from .errors import DataError, Dis2VecError, NonFiniteUpdate
from .taxonomy import TaxonomyReport, load_annotations, report
from .trainer import EmbeddingSet, TrainingConfig, train
from .vocabulary import DomainVocabulary, bundled_vocabulary, load_vocabulary

__version__ = "0.1.0"

__all__ = [
    "TokenStream", "WordTable", "build_word_table", "encode", "load_stream", "read_corpus",
    "DataError", "Dis2VecError", "NonFiniteUpdate",
    "TaxonomyReport", "load_annotations", "report",
    "EmbeddingSet", "TrainingConfig", "train",
    "DomainVocabulary", "bundled_vocabulary", "load_vocabulary",
]
