import numpy as np
import pytest


def unit_vectors(rng, m):
    """Uniform directions on the sphere, shape (m, 3)."""
    w = rng.standard_normal((m, 3))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def momentum_pairs(rng, m, scale=1.0):
    """Centered Gaussian momentum pairs, shape 2 x (m, 3)."""
    return (scale * rng.standard_normal((m, 3)),
            scale * rng.standard_normal((m, 3)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
