"""Shared fixtures: the session-wide demo classifier and a small corpus."""

import pytest

from platecheck import demo_model as _demo_model
from platecheck.synth import write_corpus


@pytest.fixture(scope="session")
def demo_model():
    """Corpus-trained classifier; training runs once per session."""
    return _demo_model()


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Tiny on-disk dataset (3 labels x 3 samples) for loader and CLI tests."""
    root = tmp_path_factory.mktemp("corpus")
    write_corpus(root, labels=["apple", "broccoli", "plate"], samples_per_label=3, seed=7)
    return root
