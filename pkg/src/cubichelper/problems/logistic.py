import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit, log_expit

from .base import FiniteSumOracle

# sup |l'''(t)| for l(t) = log(1 + e^t)
LOGISTIC_THIRD = 1.0 / (6.0 * np.sqrt(3.0))


def _reg_third_max():
    # Reg''' for x^2 / (1 + x^2) is 24 x (x^2 - 1) / (1 + x^2)^4
    res = minimize_scalar(lambda t: -abs(24 * t * (t * t - 1) / (1 + t * t) ** 4), bounds=(0.0, 0.6), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun


REG_THIRD = _reg_third_max()


class LogisticOracle(FiniteSumOracle):
    """l2-regularized logistic loss ``f_i(x) = log(1 + exp(-b_i a_i^T x)) + l2/2 ||x||^2``.

    Labels must be in {-1, +1}.  The Hessian depends on the features only.
    """

    def __init__(self, data, l2=1e-3):
        super().__init__()
        labels = np.unique(data.labels)
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError(f"labels must be -1/+1, got {labels}")
        self.data = data
        self.A = data.features
        self.b = data.labels
        self.l2 = float(l2)
        self.n, self.d = self.A.shape
        self.L = float(np.max(np.linalg.norm(self.A, axis=1)) ** 3 * LOGISTIC_THIRD)

    def _margins(self, x, idx):
        return self.b[idx] * (self.A[idx] @ x)

    def _values(self, x, idx):
        return -log_expit(self._margins(x, idx)) + 0.5 * self.l2 * (x @ x)

    def _grads(self, x, idx):
        coef = -self.b[idx] * expit(-self._margins(x, idx))
        return coef[:, None] * self.A[idx] + self.l2 * x

    def _hess_mean(self, x, idx):
        Ai = self.A[idx]
        z = Ai @ x
        w = expit(z) * expit(-z)
        return (Ai.T * w) @ Ai / idx.size + self.l2 * np.eye(self.d)


class NonconvexLogisticOracle(LogisticOracle):
    """Logistic loss plus ``lam * sum_j x_j^2 / (1 + x_j^2)`` (no l2 term)."""

    def __init__(self, data, lam):
        super().__init__(data, l2=0.0)
        self.lam = float(lam)
        self.L = self.L + self.lam * REG_THIRD

    def _reg(self, x):
        sq = x * x
        return np.sum(sq / (1 + sq)), 2 * x / (1 + sq) ** 2, (2 - 6 * sq) / (1 + sq) ** 3

    def _values(self, x, idx):
        return -log_expit(self._margins(x, idx)) + self.lam * self._reg(x)[0]

    def _grads(self, x, idx):
        coef = -self.b[idx] * expit(-self._margins(x, idx))
        return coef[:, None] * self.A[idx] + self.lam * self._reg(x)[1]

    def _hess_mean(self, x, idx):
        Ai = self.A[idx]
        z = Ai @ x
        w = expit(z) * expit(-z)
        return (Ai.T * w) @ Ai / idx.size + self.lam * np.diag(self._reg(x)[2])


def logreg_oracle(data, l2=1e-3):
    return LogisticOracle(data, l2)


def logreg_nonconvex_oracle(data, lam):
    return NonconvexLogisticOracle(data, lam)
