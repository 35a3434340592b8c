import random
import sys

import pytest

sys.setrecursionlimit(30000)

from strongcbv import corpus


@pytest.fixture(scope="session")
def rng():
    return random.Random(20240817)


@pytest.fixture(scope="session")
def random_terms_small():
    """A modest random sample for per-module property tests."""
    return corpus.random_corpus(count=150, max_size=25, seed=7)
