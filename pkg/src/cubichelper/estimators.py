"""Gradient and Hessian estimates fed to each cubic step.

Every variant builds ``(g, H)`` from a helper function ``h`` that is cheaper
than the objective ``f``:

* ``exact``: ``h = f``, the classical cubic Newton step.
* ``basic``: ``g = grad h1(x)``, ``H = hess h2(x)`` with ``h1, h2`` minibatch
  averages (no snapshot).
* ``vr``: snapshot corrected estimates

      g = grad h1(x) - grad h1(xs) + grad f(xs) + (hess f(xs) - hess h1(xs)) (x - xs)
      H = hess h2(x) - hess h2(xs) + hess f(xs)

  with fresh minibatches every call.
* ``lazy_vr``: the same ``g`` but ``H = hess f(xs)`` (``h2 = 0``), so the
  Hessian and its factorization only change when the snapshot moves.
* ``lazy_exact``: ``g = grad f(x)``, ``H = hess f(xs)``.
* ``auxiliary``: both formulas with ``h1 = h2`` a fixed auxiliary oracle; the
  main objective is only evaluated at the snapshot.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .problems.base import FiniteSumOracle

logger = logging.getLogger(__name__)

VARIANTS = ("exact", "basic", "vr", "lazy_vr", "lazy_exact", "auxiliary")


@dataclass(frozen=True)
class EstimatorConfig:
    variant: str = "exact"
    b_g: int = None
    b_h: int = None
    resample_each_step: bool = True
    helper: FiniteSumOracle = field(default=None, repr=False, compare=False)
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown estimator variant {self.variant!r}; expected one of {VARIANTS}")
        if self.variant == "auxiliary" and self.helper is None:
            raise ValueError("auxiliary estimator needs a helper oracle")
        for name in ("b_g", "b_h"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")

    def batch_sizes(self, n, m=1):
        """Batch sizes for ``n`` components and inner-loop length ``m``.

        Explicit sizes must lie in ``[1, n]``; defaults are clipped to ``n``.
        """
        for name in ("b_g", "b_h"):
            value = getattr(self, name)
            if value is not None and value > n:
                raise ValueError(f"{name}={value} exceeds n={n}")
        if self.variant == "lazy_vr":
            return self.b_g or min(m * m, n), None
        if self.variant == "vr":
            return self.b_g or min(m**4, n), self.b_h or min(m * m, n)
        if self.variant == "basic":
            return self.b_g or n, self.b_h or n
        return None, None

    @property
    def uses_snapshot(self):
        return self.variant in ("vr", "lazy_vr", "lazy_exact", "auxiliary")

    @property
    def lazy_hessian(self):
        return self.variant in ("lazy_vr", "lazy_exact")


@dataclass
class HelperEstimates:
    g: np.ndarray
    H: np.ndarray
    grad_component_evals: int = 0
    hess_component_evals: int = 0
    used_snapshot: bool = False
    helper_grad_evals: int = 0
    helper_hess_evals: int = 0
    hessian_changed: bool = True


@dataclass
class Snapshot:
    x_tilde: np.ndarray
    f_tilde: float
    grad_tilde: np.ndarray
    hess_tilde: np.ndarray
    hess_h1_tilde: np.ndarray = None
    grad_h1_tilde: np.ndarray = None
    age: int = 0

    @property
    def dim(self):
        return self.x_tilde.shape[0]


def take_snapshot(oracle, x, helper=None):
    """Full objective information at ``x`` (n gradients and n Hessians).

    With a helper oracle, its gradient and Hessian at ``x`` are cached too.
    """
    x = np.array(x, dtype=float)
    snap = Snapshot(x, oracle.value(x), oracle.grad(x), oracle.hess(x))
    if helper is not None:
        snap.grad_h1_tilde = helper.grad(x)
        snap.hess_h1_tilde = helper.hess(x)
    return snap


def sample_batch(rng, n, b):
    """``b`` indices drawn uniformly with replacement from ``range(n)``."""
    return rng.integers(0, n, size=b)


def estimate_basic(oracle, x, config, rng, batches=None):
    """Minibatch gradient and Hessian at ``x``.

    ``batches`` is an optional fixed ``(B_g, B_h)`` pair; otherwise both are
    drawn from ``rng``.
    """
    b_g, b_h = config.batch_sizes(oracle.n)
    if batches is None:
        batches = (sample_batch(rng, oracle.n, b_g), sample_batch(rng, oracle.n, b_h))
    idx_g, idx_h = batches
    return HelperEstimates(oracle.grad(x, idx_g), oracle.hess(x, idx_h), len(idx_g), len(idx_h))


def _check_snapshot(snapshot, x):
    if snapshot is None:
        raise ValueError("estimator needs a snapshot")
    if snapshot.dim != x.shape[0]:
        raise ValueError(f"snapshot dimension {snapshot.dim} does not match x dimension {x.shape[0]}")


def estimate_vr(oracle, x, snapshot, config, rng, m=1):
    """Snapshot-corrected estimates for the ``vr`` and ``lazy_vr`` variants."""
    x = np.asarray(x, dtype=float)
    _check_snapshot(snapshot, x)
    lazy = config.variant == "lazy_vr"
    b_g, b_h = config.batch_sizes(oracle.n, m)
    xs = snapshot.x_tilde
    if np.array_equal(x, xs):
        return HelperEstimates(snapshot.grad_tilde.copy(), snapshot.hess_tilde, used_snapshot=True,
                               hessian_changed=not lazy)
    step = x - xs
    idx_g = sample_batch(rng, oracle.n, b_g)
    g = (oracle.grad(x, idx_g) - oracle.grad(xs, idx_g) + snapshot.grad_tilde
         + snapshot.hess_tilde @ step - oracle.hess(xs, idx_g) @ step)
    grads, hessians = 2 * b_g, b_g
    if lazy:
        H = snapshot.hess_tilde
    else:
        idx_h = sample_batch(rng, oracle.n, b_h)
        H = oracle.hess(x, idx_h) - oracle.hess(xs, idx_h) + snapshot.hess_tilde
        hessians += 2 * b_h
    return HelperEstimates(g, H, grads, hessians, used_snapshot=True, hessian_changed=not lazy)


def estimate_auxiliary(main_oracle, helper_oracle, x, snapshot):
    """Snapshot-corrected estimates with a fixed auxiliary helper ``h1 = h2 = h``.

    The main objective enters only through quantities cached at the snapshot.
    """
    x = np.asarray(x, dtype=float)
    _check_snapshot(snapshot, x)
    if helper_oracle.d != main_oracle.d:
        raise ValueError(f"helper dimension {helper_oracle.d} does not match objective dimension {main_oracle.d}")
    xs = snapshot.x_tilde
    if np.array_equal(x, xs):
        return HelperEstimates(snapshot.grad_tilde.copy(), snapshot.hess_tilde, used_snapshot=True)
    if snapshot.grad_h1_tilde is None:
        raise ValueError("snapshot was taken without the helper")
    step = x - xs
    hess_h = helper_oracle.hess(x)
    g = (helper_oracle.grad(x) - snapshot.grad_h1_tilde + snapshot.grad_tilde
         + (snapshot.hess_tilde - snapshot.hess_h1_tilde) @ step)
    H = hess_h - snapshot.hess_h1_tilde + snapshot.hess_tilde
    nh = helper_oracle.n
    return HelperEstimates(g, 0.5 * (H + H.T), used_snapshot=True, helper_grad_evals=nh, helper_hess_evals=nh)


class HelperEstimator:
    """Stateful estimator used by the optimizer loop.

    Holds the snapshot, the random generator and (for fixed batches) the
    batch indices.  ``refresh`` moves the snapshot; its oracle cost is folded
    into the next ``estimate`` result so that per-step counts always add up
    to what was evaluated.
    """

    def __init__(self, oracle, config, m=1):
        self.oracle = oracle
        self.config = config
        self.m = m
        self.rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        self.snapshot = None
        self._pending = (0, 0, 0, 0)
        self._pending_hessian = True
        self._fixed = None
        if config.variant == "basic" and not config.resample_each_step:
            b_g, b_h = config.batch_sizes(oracle.n)
            self._fixed = (sample_batch(self.rng, oracle.n, b_g), sample_batch(self.rng, oracle.n, b_h))

    def refresh(self, x_tilde):
        if not self.config.uses_snapshot:
            return
        helper = self.config.helper if self.config.variant == "auxiliary" else None
        if self.m == 1:
            # every step sits on its snapshot, so the helper terms cancel
            helper = None
        self.snapshot = take_snapshot(self.oracle, x_tilde, helper)
        n = self.oracle.n
        nh = helper.n if helper is not None else 0
        g, h, hg, hh = self._pending
        self._pending = (g + n, h + n, hg + nh, hh + nh)
        self._pending_hessian = True

    def estimate(self, x):
        variant = self.config.variant
        x = np.asarray(x, dtype=float)
        if variant == "exact":
            est = HelperEstimates(self.oracle.grad(x), self.oracle.hess(x), self.oracle.n, self.oracle.n)
        elif variant == "basic":
            est = estimate_basic(self.oracle, x, self.config, self.rng, self._fixed)
        elif variant == "lazy_exact":
            _check_snapshot(self.snapshot, x)
            if np.array_equal(x, self.snapshot.x_tilde):
                g, evals = self.snapshot.grad_tilde.copy(), 0
            else:
                g, evals = self.oracle.grad(x), self.oracle.n
            est = HelperEstimates(g, self.snapshot.hess_tilde, evals, 0, used_snapshot=True, hessian_changed=False)
        elif variant in ("vr", "lazy_vr"):
            est = estimate_vr(self.oracle, x, self.snapshot, self.config, self.rng, self.m)
        else:
            est = estimate_auxiliary(self.oracle, self.config.helper, x, self.snapshot)
        g, h, hg, hh = self._pending
        est.grad_component_evals += g
        est.hess_component_evals += h
        est.helper_grad_evals += hg
        est.helper_hess_evals += hh
        est.hessian_changed = est.hessian_changed or self._pending_hessian
        self._pending = (0, 0, 0, 0)
        self._pending_hessian = False
        if self.snapshot is not None:
            self.snapshot.age += 1
        return est


class SubsetOracle(FiniteSumOracle):
    """The average of a fixed multiset of components of another oracle."""

    def __init__(self, parent, idx):
        super().__init__()
        self.parent = parent
        self.idx = np.asarray(idx, dtype=np.intp)
        self.n = self.idx.size
        self.d = parent.d
        self.L = parent.L

    def _values(self, x, idx):
        return self.parent._values(x, self.idx[idx])

    def _grads(self, x, idx):
        return self.parent._grads(x, self.idx[idx])

    def _hess_mean(self, x, idx):
        return self.parent._hess_mean(x, self.idx[idx])


def measure_similarity(main_oracle, helper_oracle, sample_points, mode="lipschitz"):
    """Empirical similarity constants ``(delta1_hat, delta2_hat)``.

    ``sample_points`` is a sequence of ``(x, x_tilde)`` pairs (at least 10).
    ``helper_oracle=None`` is the zero helper.

    ``bounded``: maxima of ``||grad h(x) - grad f(x)||`` and
    ``||hess h(x) - hess f(x)||`` (``x_tilde`` unused).
    ``lipschitz``: the snapshot-corrected estimates at ``(x, x_tilde)``,
    normalized as ``||G - grad f(x)|| / ||x - x_tilde||^2`` and
    ``||H - hess f(x)|| / ||x - x_tilde||``.
    """
    pairs = list(sample_points)
    if len(pairs) < 10:
        raise ValueError(f"need at least 10 sample point pairs, got {len(pairs)}")
    if mode not in ("bounded", "lipschitz"):
        raise ValueError(f"unknown mode {mode!r}")
    d = main_oracle.d

    def helper_grad(x):
        return np.zeros(d) if helper_oracle is None else helper_oracle.grad(x)

    def helper_hess(x):
        return np.zeros((d, d)) if helper_oracle is None else helper_oracle.hess(x)

    delta1 = delta2 = 0.0
    skipped = 0
    for x, xs in pairs:
        x = np.asarray(x, dtype=float)
        gf, Hf = main_oracle.grad(x), main_oracle.hess(x)
        if mode == "bounded":
            delta1 = max(delta1, np.linalg.norm(helper_grad(x) - gf))
            delta2 = max(delta2, np.linalg.norm(helper_hess(x) - Hf, 2))
            continue
        xs = np.asarray(xs, dtype=float)
        dist = np.linalg.norm(x - xs)
        if dist == 0.0:
            skipped += 1
            continue
        gs, Hs = main_oracle.grad(xs), main_oracle.hess(xs)
        Hh_s = helper_hess(xs)
        G = helper_grad(x) - helper_grad(xs) + gs + (Hs - Hh_s) @ (x - xs)
        H = helper_hess(x) - Hh_s + Hs
        delta1 = max(delta1, np.linalg.norm(G - gf) / dist**2)
        delta2 = max(delta2, np.linalg.norm(H - Hf, 2) / dist)
    if skipped:
        logger.warning("skipped %d coincident point pairs", skipped)
    return float(delta1), float(delta2)


def lipschitz_ratio(oracle, sample_points):
    """Largest ``||hess f(x) - hess f(y)|| / ||x - y||`` over the given pairs."""
    best = 0.0
    for x, y in sample_points:
        dist = np.linalg.norm(np.asarray(x) - np.asarray(y))
        if dist > 0:
            best = max(best, np.linalg.norm(oracle.hess(x) - oracle.hess(y), 2) / dist)
    return best
