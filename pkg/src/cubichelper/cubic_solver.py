"""Exact solver for the cubically regularized quadratic model.

The model around a point is

    Omega(s) = <g, s> + 1/2 <H s, s> + M/6 ||s||^3,

with ``H`` symmetric and possibly indefinite.  A global minimizer ``s`` with
``r = ||s||`` satisfies

    (H + M r / 2 I) s = -g,      H + M r / 2 I  >= 0,

so the step is found by a one-dimensional root search on ``r`` in the
eigenbasis of ``H``.  The eigendecomposition is kept in a ``SpectralCache``
and can be reused for any number of gradients, which is what makes lazy
Hessian updates cheap.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CubicModel",
    "CubicSolverError",
    "CubicStep",
    "SpectralCache",
    "factorize",
    "model_value",
    "solve_cubic",
    "solve_cubic_fresh",
]

DEFAULT_TOL = 1e-10
HARD_CASE_TOL = 1e-11
MAX_ITERS = 200


class CubicSolverError(RuntimeError):
    """Raised when the secular equation cannot be solved."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (last residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class CubicModel:
    g: np.ndarray
    H: np.ndarray
    M: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        H = np.asarray(self.H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or g.shape != (H.shape[0],):
            raise ValueError(f"dimension mismatch: g {g.shape}, H {H.shape}")
        scale = max(np.abs(H).max(initial=0.0), 1.0)
        if np.abs(H - H.T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("H is not symmetric")
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "H", H)

    def value(self, s):
        return model_value(self.g, self.H, self.M, s)


@dataclass(frozen=True)
class SpectralCache:
    """Eigendecomposition ``H = Q diag(eigenvalues) Q^T`` (ascending eigenvalues)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_hash: int

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def matrix(self):
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


@dataclass(frozen=True)
class CubicStep:
    s: np.ndarray
    r: float
    model_value: float
    hard_case: bool
    newton_iters: int
    residual: float


def _matrix_token(H):
    return hash(np.ascontiguousarray(H).tobytes())


def factorize(H):
    """Eigendecompose a symmetric matrix into a reusable ``SpectralCache``.

    Eigenvector signs are normalized so that the entry of largest magnitude
    in each column is positive; this keeps hard-case steps deterministic.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    H = 0.5 * (H + H.T)
    lam, Q = np.linalg.eigh(H)
    if Q.size:
        pivots = np.argmax(np.abs(Q), axis=0)
        signs = np.sign(Q[pivots, np.arange(Q.shape[1])])
        signs[signs == 0] = 1.0
        Q = Q * signs
    lam.setflags(write=False)
    Q.setflags(write=False)
    return SpectralCache(lam, Q, _matrix_token(H))


def model_value(g, H, M, s):
    s = np.asarray(s, dtype=float)
    r = np.linalg.norm(s)
    return float(g @ s + 0.5 * s @ (H @ s) + M / 6.0 * r**3)


def _step_norm(gh, shifted):
    return np.sqrt(np.sum((gh / shifted) ** 2))


def solve_cubic(cache, g, M, tol=DEFAULT_TOL):
    """Globally minimize the cubic model for the factorized Hessian in ``cache``.

    Returns a ``CubicStep``.  ``residual`` is the relative first-order residual
    ``||g + H s + M r/2 s|| / (||g|| + M r^2 + ||H|| r)``.
    """
    g = np.asarray(g, dtype=float)
    lam = cache.eigenvalues
    Q = cache.eigenvectors
    if g.shape != lam.shape:
        raise ValueError(f"gradient has shape {g.shape}, expected {lam.shape}")
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    if not 0 < tol <= 1e-4:
        raise ValueError(f"tol must lie in (0, 1e-4], got {tol}")

    half_m = 0.5 * M
    gh = Q.T @ g
    gnorm = np.linalg.norm(g)
    lam_min = lam[0] if lam.size else 0.0
    r_low = max(0.0, -lam_min / half_m)
    hard_case = False
    iters = 0

    if gnorm == 0.0 and lam_min >= 0.0:
        s_hat = np.zeros_like(gh)
        r = 0.0
    else:
        spread = np.abs(lam).max(initial=0.0)
        minimal = lam <= lam_min + 1e-12 * spread
        rest = ~minimal
        hard_case = lam_min < 0.0 and bool(np.all(np.abs(gh[minimal]) <= HARD_CASE_TOL * gnorm))
        if hard_case:
            shifted = lam[rest] + half_m * r_low
            s_rest = np.zeros_like(gh)
            s_rest[rest] = -gh[rest] / shifted
            rest_norm = np.linalg.norm(s_rest)
            # interior root feasible -> ordinary easy-case search below
            hard_case = rest_norm <= r_low
        if hard_case:
            r = r_low
            s_hat = s_rest
            s_hat[minimal] = 0.0
            first = np.flatnonzero(minimal)[0]
            s_hat[first] = np.sqrt(max(r_low**2 - rest_norm**2, 0.0))
        else:
            r, iters = _secular_root(gh, lam, half_m, r_low, gnorm, tol)
            s_hat = -gh / (lam + half_m * r)
            if r_low > 0.0 and abs(np.linalg.norm(s_hat) - r) > 10 * tol * r:
                # nearly hard case: the root sits closer to r_low than r can
                # resolve, so finish the step along the minimal eigenspace
                s_hat[minimal] = 0.0
                rest_norm = np.linalg.norm(s_hat)
                g_min = gh[minimal]
                if rest_norm < r and np.any(g_min):
                    u = g_min / np.abs(g_min).max()  # rescale first, the entries may underflow when squared
                    s_hat[minimal] = -u / np.linalg.norm(u) * np.sqrt(r * r - rest_norm**2)

    s = Q @ s_hat
    r_true = float(np.linalg.norm(s))
    H = cache.matrix()
    grad_res = g + H @ s + half_m * r_true * s
    scale = gnorm + M * r_true**2 + np.abs(lam).max(initial=0.0) * r_true
    residual = float(np.linalg.norm(grad_res) / scale) if scale > 0 else 0.0
    value = float(g @ s + 0.5 * (s_hat**2) @ lam + M / 6.0 * r_true**3)
    return CubicStep(s, r_true, value, hard_case, iters, residual)


def _secular_root(gh, lam, half_m, r_low, gnorm, tol):
    """Find r > r_low with ||(Lambda + half_m r)^-1 gh|| = r.

    chi(r) = ||s(r)|| - r is convex and decreasing on the bracket, so Newton
    iterates stay left of the root after the first step and converge
    monotonically; bisection guards the first step.
    """
    a = r_low
    # keep b strictly right of r_low even when sqrt(gnorm / half_m) is below its resolution
    b = max(r_low + np.sqrt(gnorm / half_m), r_low * (1 + 8 * np.finfo(float).eps))
    while _step_norm(gh, lam + half_m * b) > b:
        a = b
        b *= 2.0

    r = b
    chi = np.nan
    for it in range(1, MAX_ITERS + 1):
        shifted = lam + half_m * r
        q = gh / shifted
        norm = np.sqrt(q @ q)
        chi = norm - r
        if abs(chi) <= tol * r:
            return r, it
        if chi > 0.0:
            a = r
        else:
            b = r
        if b - a <= 4 * np.finfo(float).eps * b:
            return r, it
        slope = -half_m * np.sum(q * q / shifted) / norm - 1.0 if norm > 0 else -1.0
        r_new = r - chi / slope
        if r_new <= a and r_low < a < r:
            # overshoot from the right: restart from the left endpoint
            r_new = a
        elif not (a < r_new < b):
            r_new = 0.5 * (a + b)
        r = r_new
    raise CubicSolverError("secular equation did not converge", residual=float(chi), iterations=MAX_ITERS)


def solve_cubic_fresh(model, tol=DEFAULT_TOL):
    return solve_cubic(factorize(model.H), model.g, model.M, tol)
