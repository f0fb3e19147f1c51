import numpy as np

from .base import FiniteSumOracle


class DiagonalNetOracle(FiniteSumOracle):
    """Diagonal linear network ``f_i(u, v) = (a_i^T (u * v) - b_i)^2 + lam/2 ||(u, v)||^2``.

    Parameters are packed as ``x = (u, v)`` so the oracle dimension is twice
    the feature dimension.  There is no closed-form Hessian-Lipschitz
    constant; ``L`` is estimated as 1.5 times the largest observed ratio
    ``||H(x) - H(y)|| / ||x - y||`` over random pairs in ``[-box, box]^d``.
    """

    def __init__(self, data, lam=0.0, box=2.0, lipschitz_pairs=10_000, seed=0):
        super().__init__()
        self.data = data
        self.A = data.features
        self.b = data.labels
        self.lam = float(lam)
        self.p = self.A.shape[1]
        self.n = self.A.shape[0]
        self.d = 2 * self.p
        self._S = self.A.T @ self.A / self.n
        self._c = self.A.T @ self.b / self.n
        self.L = estimate_hessian_lipschitz(self.full_hessian, self.d, box, lipschitz_pairs, seed)

    def _split(self, x):
        if x.shape != (self.d,):
            raise ValueError(f"expected a vector of length {self.d}, got {x.shape}")
        return x[: self.p], x[self.p:]

    def _values(self, x, idx):
        u, v = self._split(x)
        res = self.A[idx] @ (u * v) - self.b[idx]
        return res**2 + 0.5 * self.lam * (x @ x)

    def _grads(self, x, idx):
        u, v = self._split(x)
        Ai = self.A[idx]
        res = Ai @ (u * v) - self.b[idx]
        g = np.hstack([2 * res[:, None] * Ai * v, 2 * res[:, None] * Ai * u])
        return g + self.lam * x

    def _assemble(self, S, c, u, v):
        z_moment = S @ (u * v) - c
        Huu = 2 * (S * v).T * v
        Hvv = 2 * (S * u).T * u
        Huv = 2 * (S * u).T * v
        Huv = Huv.T + 2 * np.diag(z_moment)
        H = np.block([[Huu, Huv], [Huv.T, Hvv]])
        return H + self.lam * np.eye(self.d)

    def _hess_mean(self, x, idx):
        u, v = self._split(x)
        Ai = self.A[idx]
        S = Ai.T @ Ai / idx.size
        c = Ai.T @ self.b[idx] / idx.size
        return self._assemble(S, c, u, v)

    def full_hessian(self, x):
        u, v = self._split(np.asarray(x, dtype=float))
        return self._assemble(self._S, self._c, u, v)


def estimate_hessian_lipschitz(hessian, d, box, pairs, seed, safety=1.5):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    best = 0.0
    for _ in range(pairs):
        x = rng.uniform(-box, box, d)
        step = rng.standard_normal(d)
        step *= 10.0 ** rng.uniform(-3, np.log10(box)) / np.linalg.norm(step)
        y = x + step
        diff = np.linalg.norm(hessian(x) - hessian(y), 2)
        best = max(best, diff / np.linalg.norm(step))
    return safety * best


def diag_nn_oracle(data, lam=0.0, **kwargs):
    if data.features.shape[1] < 1:
        raise ValueError("diagonal network needs at least one feature")
    return DiagonalNetOracle(data, lam, **kwargs)
