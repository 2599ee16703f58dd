import numpy as np
import pytest

from avwc import AVWC, Channel, Distribution


@pytest.fixture
def bsc_pair_avwc():
    """Single-state instance: clean main link, noisy eavesdropper."""
    return AVWC(main=(Channel.bsc(0.1),), eaves=(Channel.bsc(0.3),))


@pytest.fixture
def degraded_two_state_avwc():
    """Two jammer states on the main link, constant eavesdropper channel."""
    return AVWC(
        main=(Channel.bsc(0.05), Channel.bsc(0.15)),
        eaves=(Channel.bsc(0.4), Channel.bsc(0.4)),
    )


@pytest.fixture
def adder_family():
    """y = x + s over a ternary output; the classic symmetrisable family."""
    w0 = Channel(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    w1 = Channel(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    return [w0, w1]


def random_distribution(rng, size):
    return Distribution(rng.dirichlet(np.ones(size)))


def random_channel(rng, input_size, output_size):
    return Channel(rng.dirichlet(np.ones(output_size), size=input_size))


def channel_corpus(seed=42, count=20):
    """Deterministic (p, W) corpus with alphabet sizes 2 and 3."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(count):
        a = int(rng.integers(2, 4))
        b = int(rng.integers(2, 4))
        corpus.append((random_distribution(rng, a), random_channel(rng, a, b)))
    return corpus
