"""First-order comparators: gradient descent with Armijo backtracking and
constant-step minibatch SGD.  Both emit the same trace rows as the cubic
method, with ``hess_units = 0``."""

from dataclasses import dataclass
import math
import time

import numpy as np

from .costmodel import CostLedger
from .optimizer import Trace, make_row


class LineSearchError(RuntimeError):
    pass


@dataclass
class BaselineConfig:
    variant: str = "gd"
    iters: int = 100
    c_armijo: float = 1e-4
    backtrack_factor: float = 0.5
    init_step: float = 1.0
    step: float = 0.1
    batch: int = 1
    seed: int = 0
    x0: np.ndarray = None
    d_eff: float = None
    max_halvings: int = 60

    def __post_init__(self):
        if self.variant not in ("gd", "sgd"):
            raise ValueError(f"unknown baseline {self.variant!r}")
        if self.iters < 0:
            raise ValueError("iters must be nonnegative")
        if not (self.step > 0 and self.init_step > 0):
            raise ValueError("step sizes must be positive")
        if not 0 < self.c_armijo < 1 or not 0 < self.backtrack_factor < 1:
            raise ValueError("need 0 < c_armijo < 1 and 0 < backtrack_factor < 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


def _start(oracle, config):
    x = np.zeros(oracle.d) if config.x0 is None else np.array(config.x0, dtype=float)
    if x.shape != (oracle.d,):
        raise ValueError(f"x0 has shape {x.shape}, oracle dimension is {oracle.d}")
    ledger = CostLedger(d_eff=config.d_eff or oracle.d)
    return x, ledger, Trace(ledger=ledger)


def run_gd(oracle, config):
    """Gradient descent; the step doubles after every accepted iteration and
    halves while the Armijo condition fails.  Stops early at a zero gradient."""
    x, ledger, trace = _start(oracle, config)
    n = oracle.n
    f = oracle.value(x)
    trace.f0 = f
    eta = config.init_step
    for t in range(config.iters):
        start = time.perf_counter_ns()
        g = oracle.grad(x)
        ledger.charge(grad=n)
        gg = float(g @ g)
        if gg == 0.0:
            break
        for _ in range(config.max_halvings + 1):
            x_new = x - eta * g
            f_new = oracle.value(x_new)
            if f_new <= f - config.c_armijo * eta * gg:
                break
            eta *= config.backtrack_factor
        else:
            raise LineSearchError(f"no Armijo step after {config.max_halvings} halvings at iteration {t}")
        assert f_new <= f - config.c_armijo * eta * gg
        x, f = x_new, f_new
        step_norm = eta * math.sqrt(gg)
        eta /= config.backtrack_factor
        wall = time.perf_counter_ns() - start
        grad_norm = float(np.linalg.norm(oracle.grad(x)))
        ledger.charge_audit(grad=n)
        trace.append(make_row(t + 1, f, grad_norm, math.nan, step_norm, False, ledger, wall))
    return x, trace


def run_sgd(oracle, config):
    """Minibatch SGD with a constant step and with-replacement sampling."""
    if config.batch > oracle.n:
        raise ValueError(f"batch {config.batch} exceeds n={oracle.n}")
    x, ledger, trace = _start(oracle, config)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    trace.f0 = oracle.value(x)
    for t in range(config.iters):
        start = time.perf_counter_ns()
        idx = rng.integers(0, oracle.n, size=config.batch)
        if config.batch == oracle.n:
            idx = None  # full batch, so the iterates match gradient descent
        step = config.step * oracle.grad(x, idx)
        ledger.charge(grad=config.batch)
        x = x - step
        wall = time.perf_counter_ns() - start
        f = oracle.value(x)
        grad_norm = float(np.linalg.norm(oracle.grad(x)))
        ledger.charge_audit(grad=oracle.n)
        trace.append(make_row(t + 1, f, grad_norm, math.nan, float(np.linalg.norm(step)), False, ledger, wall))
    return x, trace
