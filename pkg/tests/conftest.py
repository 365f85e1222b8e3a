import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_curvature_tensor(rng, dim, terms=3):
    """Sum of Kulkarni-Nomizu products of random symmetric matrices, built by
    explicit loops so it does not share code with the package."""
    rm = np.zeros((dim,) * 4)
    for _ in range(terms):
        a = rng.normal(size=(dim, dim))
        b = rng.normal(size=(dim, dim))
        a, b = a + a.T, b + b.T
        for i in range(dim):
            for j in range(dim):
                for k in range(dim):
                    for l in range(dim):
                        rm[i, j, k, l] += 0.5 * (
                            a[i, k] * b[j, l] + a[j, l] * b[i, k]
                            - a[i, l] * b[j, k] - a[j, k] * b[i, l]
                        )
    return rm
