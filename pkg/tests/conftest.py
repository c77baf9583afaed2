import numpy as np
import pytest

from brownlab.algebra import BlockOperator, make_algebra
from brownlab.verify import random_operator


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def three_atom():
    return make_algebra([0.2, 0.3, 0.5], [2, 3, 4])


@pytest.fixture
def T3(three_atom, rng):
    return random_operator(three_atom, rng)


def single(block):
    block = np.atleast_2d(np.asarray(block, dtype=complex))
    alg = make_algebra([1.0], [block.shape[0]])
    return BlockOperator(alg, [block])


def jordan(n):
    return np.diag(np.ones(n - 1), 1).astype(complex)
