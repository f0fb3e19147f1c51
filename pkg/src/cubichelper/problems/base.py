from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.features, dtype=float))
        b = np.asarray(self.labels, dtype=float).reshape(-1)
        if A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"dataset must have n >= 1 and d >= 1, got shape {A.shape}")
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"{A.shape[0]} feature rows but {b.shape[0]} labels")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "features", A)
        object.__setattr__(self, "labels", b)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def subset(self, idx):
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class GradDominanceSpec:
    """``f(x) - f_star <= tau * ||grad f(x)||**alpha``."""

    tau: float
    alpha: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in [1, 2], got {self.alpha}")


class FiniteSumOracle:
    """``f(x) = (1/n) sum_i f_i(x)`` with per-component first and second derivatives.

    Subclasses implement the three batched kernels ``_values``, ``_grads`` and
    ``_hess_mean`` over an index array (repeats allowed).  Every call through
    the public methods is counted in ``grad_evals`` / ``hess_evals`` so that
    estimator bookkeeping can be checked against what was actually computed.
    """

    n: int
    d: int
    L: float
    f_star = None

    def __init__(self):
        self.grad_evals = 0
        self.hess_evals = 0
        self.value_evals = 0

    def _all(self):
        return np.arange(self.n)

    def _index(self, idx):
        if idx is None:
            return self._all()
        idx = np.asarray(idx, dtype=np.intp).reshape(-1)
        if idx.size == 0:
            raise ValueError("empty index batch")
        return idx

    # batched kernels -------------------------------------------------------
    def _values(self, x, idx):
        raise NotImplementedError

    def _grads(self, x, idx):
        raise NotImplementedError

    def _hess_mean(self, x, idx):
        raise NotImplementedError

    # averaged access --------------------------------------------------------
    def value(self, x, idx=None):
        idx = self._index(idx)
        self.value_evals += idx.size
        return float(np.mean(self._values(np.asarray(x, dtype=float), idx)))

    def grad(self, x, idx=None):
        idx = self._index(idx)
        self.grad_evals += idx.size
        return self._grads(np.asarray(x, dtype=float), idx).mean(axis=0)

    def hess(self, x, idx=None):
        idx = self._index(idx)
        self.hess_evals += idx.size
        H = self._hess_mean(np.asarray(x, dtype=float), idx)
        return 0.5 * (H + H.T)

    # component access -------------------------------------------------------
    def f_i(self, i, x):
        return self.value(x, [i])

    def grad_i(self, i, x):
        return self.grad(x, [i])

    def hess_i(self, i, x):
        return self.hess(x, [i])

    def component_grads(self, x, idx=None):
        idx = self._index(idx)
        self.grad_evals += idx.size
        return self._grads(np.asarray(x, dtype=float), idx)

    def reset_counts(self):
        self.grad_evals = self.hess_evals = self.value_evals = 0


class QuadraticOracle(FiniteSumOracle):
    """Least-squares components ``f_i(x) = 1/2 (c_i^T x - y_i)^2 + mu/2 ||x||^2``."""

    def __init__(self, C, y, mu=0.0):
        super().__init__()
        self.C = np.atleast_2d(np.asarray(C, dtype=float))
        self.y = np.asarray(y, dtype=float).reshape(-1)
        self.mu = float(mu)
        self.n, self.d = self.C.shape
        self.L = 0.0
        H = self.C.T @ self.C / self.n + self.mu * np.eye(self.d)
        self.x_star = np.linalg.solve(H, self.C.T @ self.y / self.n) if self.mu > 0 or np.linalg.matrix_rank(H) == self.d else None
        self.f_star = None if self.x_star is None else float(np.mean(self._values(self.x_star, self._all())))

    def _values(self, x, idx):
        res = self.C[idx] @ x - self.y[idx]
        return 0.5 * res**2 + 0.5 * self.mu * (x @ x)

    def _grads(self, x, idx):
        Ci = self.C[idx]
        res = Ci @ x - self.y[idx]
        return res[:, None] * Ci + self.mu * x

    def _hess_mean(self, x, idx):
        Ci = self.C[idx]
        return Ci.T @ Ci / idx.size + self.mu * np.eye(self.d)


def synthetic_strongly_convex(n, d, mu, seed):
    """Random least-squares problem plus ``mu/2 ||x||^2`` with its exact minimum.

    Returns the oracle and the matching ``GradDominanceSpec(1/(2 mu), 2)``.
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    C = rng.standard_normal((n, d))
    y = C @ rng.standard_normal(d) + 0.1 * rng.standard_normal(n)
    oracle = QuadraticOracle(C, y, mu)
    return oracle, GradDominanceSpec(tau=1.0 / (2.0 * mu), alpha=2.0)
