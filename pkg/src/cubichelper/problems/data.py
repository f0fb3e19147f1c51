import numpy as np

from .base import Dataset


def _rng(seed):
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def synthetic_classification(n=2000, d=50, seed=0, flip=0.1):
    """Gaussian features with rows scaled to roughly unit norm, labels from a
    planted separator with a fraction ``flip`` of labels flipped."""
    rng = _rng(seed)
    A = rng.standard_normal((n, d)) / np.sqrt(d)
    w = rng.standard_normal(d)
    w *= 3.0 / np.linalg.norm(w) * np.sqrt(d)
    b = np.where(A @ w >= 0, 1.0, -1.0)
    b[rng.random(n) < flip] *= -1.0
    return Dataset(A, b)


def synthetic_regression(n=1000, d=10, seed=0, noise=0.1):
    """Gaussian features, targets ``a^T (u * v) + noise`` for a planted pair (u, v)."""
    rng = _rng(seed)
    A = rng.standard_normal((n, d))
    u, v = rng.standard_normal(d), rng.standard_normal(d)
    b = A @ (u * v) / np.sqrt(d) + noise * rng.standard_normal(n)
    return Dataset(A / np.sqrt(d), b)


def split_labeled(data, seed=0, fraction=0.5):
    """Shuffle and split into a labeled part and an unlabeled part."""
    rng = _rng(seed)
    perm = rng.permutation(data.n)
    k = int(round(fraction * data.n))
    return data.subset(perm[:k]), data.subset(perm[k:])


def random_labels(data, seed):
    rng = _rng(seed)
    return Dataset(data.features, rng.choice([-1.0, 1.0], size=data.n))
