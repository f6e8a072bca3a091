import sys

import pytest

from outfitcomplete import corpus as cp
from outfitcomplete.benchmark import BenchmarkConfig, prepare_synthetic
from outfitcomplete.model import ModelConfig
from outfitcomplete.taxonomy import fixture_taxonomy
from outfitcomplete.training import TrainConfig, train


@pytest.fixture(scope="session")
def taxonomy():
    return fixture_taxonomy()


@pytest.fixture(scope="session")
def tiny_vocabs():
    words = ["red", "blue", "black", "dress", "jeans", "top", "bag"]
    return cp.Vocabulary(words, "source"), cp.Vocabulary(words, "target")


@pytest.fixture(scope="session")
def small_corpus():
    """~150 training examples from a deterministic synthetic corpus."""
    _, structured, corpus, _ = prepare_synthetic(
        BenchmarkConfig(seed=7, n_posts=220))
    return corpus


@pytest.fixture(scope="session")
def overfit_corpus(small_corpus):
    """50-example fixture that validates on its own training data."""
    return cp.Corpus(train=small_corpus.train[:50],
                     test=small_corpus.test[:20],
                     validate=small_corpus.train[:50],
                     source_vocab=small_corpus.source_vocab,
                     target_vocab=small_corpus.target_vocab)


@pytest.fixture(scope="session")
def overfit_params(overfit_corpus):
    """A model memorizing the 50-example fixture; shared across test modules."""
    mc = ModelConfig(embedding_dim=16, hidden_dim=32,
                     attention_enabled=True, seed=0)
    tc = TrainConfig(epochs=150, early_stop_patience=150, lr_decay=0.9, seed=0)
    params, _ = train(overfit_corpus, mc, tc)
    return params


def pytest_terminal_summary(terminalreporter):
    """Echo one pass/fail line per release criterion after the run."""
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "VERDICTS", [])
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
