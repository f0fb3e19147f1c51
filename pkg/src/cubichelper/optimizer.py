"""Cubic Newton with helper functions.

``run`` performs ``S`` rounds of ``m`` cubic steps.  At the start of every
round the snapshot is moved (to the last iterate or to the best of the last
``m`` iterates), then each step asks the estimator for ``(g, H)`` and
minimizes the cubic model.  The Hessian factorization is recomputed only
when the estimator reports a new ``H``.
"""

from dataclasses import dataclass, field, replace
import logging
import math
import time

import numpy as np

from .costmodel import CostLedger
from .cubic_solver import CubicSolverError, factorize, solve_cubic
from .estimators import EstimatorConfig, HelperEstimator

logger = logging.getLogger(__name__)

SNAPSHOT_POLICIES = ("last_iterate", "best_iterate")
M_RULES = ("nonconvex", "gradient_dominated")


class DivergenceError(RuntimeError):
    pass


class StepFailure(RuntimeError):
    """A cubic subproblem failed; carries the iteration where it happened."""

    def __init__(self, iteration, cause):
        super().__init__(f"cubic step failed at iteration {iteration}: {cause}")
        self.iteration = iteration


def select_M(L, delta1, delta2, m, rule="nonconvex"):
    """Regularization weight ``max(L, 32 delta1 m^2, 16 delta2 m)``.

    ``rule="gradient_dominated"`` uses ``max(L, 34 delta1 m^2, 11 delta2 m)``,
    the constants required with the best-iterate snapshot.
    """
    if not L > 0 or delta1 < 0 or delta2 < 0 or m < 1:
        raise ValueError(f"need L > 0, delta1, delta2 >= 0, m >= 1; got {(L, delta1, delta2, m)}")
    if rule == "nonconvex":
        M = max(L, 32 * delta1 * m**2, 16 * delta2 * m)
    elif rule == "gradient_dominated":
        M = max(L, 34 * delta1 * m**2, 11 * delta2 * m)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    if rule == "nonconvex":
        assert similarity_condition(M, delta1, delta2, m), "M violates the similarity balance condition"
    return float(M)


def similarity_condition(M, delta1, delta2, m):
    """``4 (delta1/M)^(3/2) + 73 (delta2/M)^3 <= 1 / (24 m^3)``."""
    return 4 * (delta1 / M) ** 1.5 + 73 * (delta2 / M) ** 3 <= 1.0 / (24 * m**3) * (1 + 1e-12)


@dataclass
class RunConfig:
    m: int = 1
    S: int = 10
    M: object = "auto"
    snapshot_policy: str = "last_iterate"
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    delta1: float = None
    delta2: float = None
    M_rule: str = "nonconvex"
    tol_subproblem: float = 1e-10
    x0: np.ndarray = None
    seed: int = 0
    track_mu: bool = False
    audit: bool = False
    keep_iterates: bool = False
    d_eff: float = None
    divergence_factor: float = 1e10

    def __post_init__(self):
        if self.m < 1 or self.S < 0:
            raise ValueError(f"need m >= 1 and S >= 0, got m={self.m}, S={self.S}")
        if self.snapshot_policy not in SNAPSHOT_POLICIES:
            raise ValueError(f"snapshot_policy must be one of {SNAPSHOT_POLICIES}")
        if self.M_rule not in M_RULES:
            raise ValueError(f"M_rule must be one of {M_RULES}")
        if self.M != "auto" and not float(self.M) > 0:
            raise ValueError(f"M must be positive or 'auto', got {self.M}")

    def resolve_M(self, L):
        if self.M != "auto":
            return float(self.M)
        values = (self.delta1, self.delta2, L)
        if any(v is None or not math.isfinite(v) for v in values):
            raise ValueError("auto M needs finite delta1, delta2 and L")
        return select_M(L, self.delta1, self.delta2, self.m, self.M_rule)


@dataclass
class TraceRow:
    t: int
    f: float
    grad_norm: float
    mu_M: float
    r: float
    snapshot_refreshed: bool
    grad_units: int
    hess_units: int
    factorizations: int
    gradcost_total: float
    audit_grad_units: int
    audit_hess_units: int
    wall_ns: int
    helper_grad_units: int = 0
    helper_hess_units: int = 0


@dataclass
class Trace:
    rows: list = field(default_factory=list)
    ledger: CostLedger = field(default_factory=CostLedger)
    f0: float = math.nan
    M: float = math.nan
    iterates: list = field(default_factory=list)
    audits: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def append(self, row):
        if self.rows and row.t <= self.rows[-1].t:
            raise ValueError("trace rows must have increasing t")
        self.rows.append(row)

    @property
    def f_values(self):
        """Objective values ``f(x_0), ..., f(x_T)``."""
        return np.array([self.f0] + [row.f for row in self.rows])


def make_row(t, f, grad_norm, mu, r, refreshed, ledger, wall_ns):
    return TraceRow(t, f, grad_norm, mu, r, refreshed, ledger.grad_units, ledger.hess_units,
                    ledger.factorizations, ledger.gradcost_total, ledger.audit_grad_units,
                    ledger.audit_hess_units, wall_ns, ledger.helper_grad_units, ledger.helper_hess_units)


@dataclass(frozen=True)
class StationarityMeasure:
    value: float
    grad_part: float
    eig_part: float


def mu_measure(oracle, x, c, ledger=None):
    """``max(||grad f||^(3/2), (-lambda_min)^3 / c^(3/2))`` from full-batch derivatives."""
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    grad = oracle.grad(x)
    lam_min = np.linalg.eigvalsh(oracle.hess(x))[0]
    if ledger is not None:
        ledger.charge_audit(grad=oracle.n, hess=oracle.n)
    grad_part = float(np.linalg.norm(grad) ** 1.5)
    eig_part = float((-lam_min) ** 3 / c**1.5)
    return StationarityMeasure(max(grad_part, eig_part), grad_part, eig_part)


def _best_recent(iterates, f_values, m):
    window = range(max(0, len(iterates) - m), len(iterates))
    best = min(window, key=lambda i: (f_values[i], -i))
    return iterates[best]


def run(oracle, config):
    """Run the helper-driven cubic Newton method; returns ``(x_final, trace)``."""
    d = oracle.d
    x = np.zeros(d) if config.x0 is None else np.array(config.x0, dtype=float)
    if x.shape != (d,):
        raise ValueError(f"x0 has shape {x.shape}, oracle dimension is {d}")
    M = config.resolve_M(oracle.L)
    ledger = CostLedger(d_eff=config.d_eff or d)
    estimator = HelperEstimator(oracle, replace(config.estimator, seed=config.seed), config.m)
    trace = Trace(ledger=ledger, M=M)

    f0 = oracle.value(x)
    ledger.charge_audit(grad=oracle.n)
    trace.f0 = f0
    f_star = getattr(oracle, "f_star", None)
    gap0 = f0 - f_star if f_star is not None else abs(f0)
    blowup = config.divergence_factor * max(gap0, 1e-12 * max(1.0, abs(f0)))
    recent_x, recent_f = [x.copy()], [f0]
    if config.keep_iterates:
        trace.iterates.append(x.copy())

    if config.audit:
        from .verify import audit_step

    cache = None
    for t in range(config.S * config.m):
        start = time.perf_counter_ns()
        refreshed = False
        if config.estimator.uses_snapshot and t % config.m == 0:
            if config.snapshot_policy == "best_iterate":
                x_tilde = _best_recent(recent_x, recent_f, config.m)
            else:
                x_tilde = x
            estimator.refresh(x_tilde)
            recent_x, recent_f = recent_x[-1:], recent_f[-1:]
            refreshed = True
        est = estimator.estimate(x)
        if cache is None or est.hessian_changed:
            cache = factorize(est.H)
            ledger.charge(factorizations=1)
        try:
            step = solve_cubic(cache, est.g, M, config.tol_subproblem)
        except (CubicSolverError, ValueError) as exc:
            raise StepFailure(t, exc) from exc
        ledger.charge(grad=est.grad_component_evals, hess=est.hess_component_evals,
                      helper_grad=est.helper_grad_evals, helper_hess=est.helper_hess_evals)
        x_new = x + step.s
        wall = time.perf_counter_ns() - start

        f_new = oracle.value(x_new)
        grad_norm = float(np.linalg.norm(oracle.grad(x_new)))
        ledger.charge_audit(grad=oracle.n)
        mu = math.nan
        if config.track_mu:
            mu = mu_measure(oracle, x_new, M, ledger).value
        if config.audit:
            trace.audits.append(audit_step(oracle, x, x_new, est.g, est.H, M, step=step))
            ledger.charge_audit(grad=2 * oracle.n, hess=2 * oracle.n)
        if not math.isfinite(f_new) or f_new - f0 > blowup:
            raise DivergenceError(f"objective rose from {f0:.6g} to {f_new:.6g} at iteration {t}; "
                                  f"M={M:.6g} is probably too small")

        x = x_new
        recent_x.append(x.copy())
        recent_f.append(f_new)
        if config.keep_iterates:
            trace.iterates.append(x.copy())
        trace.append(make_row(t + 1, f_new, grad_norm, mu, step.r, refreshed, ledger, wall))
    return x, trace


def select_output(trace, mode="last", seed=0):
    """Index of the returned iterate among the trace rows."""
    n = len(trace)
    if n == 0:
        raise ValueError("empty trace")
    if mode == "last":
        return n - 1
    if mode == "best_f":
        return int(np.argmin([row.f for row in trace]))
    if mode == "uniform_random":
        return int(np.random.default_rng(np.random.SeedSequence(seed)).integers(n))
    raise ValueError(f"unknown output mode {mode!r}")


def solve_to_optimality(oracle, x0=None, M=None, grad_tol=1e-12, max_iter=500):
    """Exact cubic Newton until ``||grad f|| <= grad_tol``; caches ``oracle.f_star``.

    Meant for convex benchmarks whose optimum value is needed for rate plots.
    """
    x = np.zeros(oracle.d) if x0 is None else np.array(x0, dtype=float)
    M = M or max(oracle.L, 1e-8)
    for _ in range(max_iter):
        g = oracle.grad(x)
        if np.linalg.norm(g) <= grad_tol:
            break
        step = solve_cubic(factorize(oracle.hess(x)), g, M)
        if step.r == 0.0:
            break
        x = x + step.s
    oracle.f_star = oracle.value(x)
    oracle.x_star = x
    return x, oracle.f_star
