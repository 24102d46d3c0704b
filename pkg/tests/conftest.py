import numpy as np
import pytest

from dis2vec.corpus import build_word_table, encode
from dis2vec.synthgen import SyntheticSpec, generate
from dis2vec.vocabulary import parse_vocabulary


@pytest.fixture(scope="session")
def small_synthetic():
    """A few thousand planted sentences: (corpus, vocab, table, stream)."""
    corpus = generate(SyntheticSpec(n_diseases=6, n_filler_words=200, n_sentences=3000, seed=11))
    vocab = parse_vocabulary(corpus.vocabulary)
    table = build_word_table(corpus.sentences, 5)
    return corpus, vocab, table, encode(corpus.sentences, table)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(number: int, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        print(ACCEPTANCE_LINES[-1])
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
