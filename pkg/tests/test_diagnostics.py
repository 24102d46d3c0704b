"""Model comparisons outside the acceptance set, kept as regression guards."""

import numpy as np
import pytest

from dis2vec.corpus import build_word_table, encode
from dis2vec.synthgen import SyntheticSpec, generate
from dis2vec.taxonomy import make_queries, report
from dis2vec.trainer import TrainingConfig, train
from dis2vec.vocabulary import parse_vocabulary


def _overall(corpus, mode, seed, **kw):
    vocab = parse_vocabulary(corpus.vocabulary)
    table = build_word_table(corpus.sentences, 5)
    cfg = TrainingConfig(mode=mode, seed=seed, subsample_t=1e-3, pi_s=0.7, pi_o=0.7, **kw)
    emb = train(encode(corpus.sentences, table), table, vocab, cfg)
    return report(make_queries(vocab, corpus.annotations), emb, vocab).overall


@pytest.mark.slow
def test_combined_beats_sgns_when_terms_cooccur():
    # three same-category terms per sentence, so vocabulary words share contexts
    corpus = generate(SyntheticSpec(n_sentences=20_000, terms_per_sentence=3, seed=0))
    sgns = [_overall(corpus, "sgns", s, dim=32) for s in (1, 2, 3)]
    combined = [_overall(corpus, "dis2vec_combined", s, dim=32) for s in (1, 2, 3)]
    assert np.mean(combined) > np.mean(sgns)


@pytest.mark.slow
def test_sample_mode_tracks_sgns_on_single_term_corpus():
    corpus = generate(SyntheticSpec(n_sentences=20_000, n_diseases=10, seed=1))
    sgns = _overall(corpus, "sgns", 1, dim=32)
    sample = _overall(corpus, "dis2vec_sample", 1, dim=32)
    assert abs(sample - sgns) < 0.05
