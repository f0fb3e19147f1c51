import numpy as np
import pytest

from cubichelper.baselines import BaselineConfig, LineSearchError, run_gd, run_sgd
from cubichelper.problems import QuadraticOracle, logreg_oracle, synthetic_classification
from cubichelper.problems.base import synthetic_strongly_convex


def test_config_validation():
    for bad in (dict(variant="adam"), dict(step=0.0), dict(batch=0), dict(c_armijo=1.5), dict(iters=-1)):
        with pytest.raises(ValueError):
            BaselineConfig(**bad)


def test_gd_one_dimensional_quadratic():
    oracle = QuadraticOracle(np.ones((1, 1)), np.zeros(1))
    x, trace = run_gd(oracle, BaselineConfig("gd", iters=5, x0=np.ones(1), init_step=1.0))
    assert x[0] == 0.0
    assert trace[0].f == 0.0 and trace[0].r == 1.0
    # the next gradient is zero, so the run stops after one step
    assert len(trace) == 1


def test_gd_zero_gradient_stops():
    oracle = QuadraticOracle(np.random.default_rng(0).standard_normal((30, 4)), np.zeros(30), mu=0.5)
    x, trace = run_gd(oracle, BaselineConfig("gd", iters=10))
    assert len(trace) == 0
    assert not x.any()


def test_gd_monotone_on_logistic():
    oracle = logreg_oracle(synthetic_classification(500, 20, 0), l2=1e-3)
    _, trace = run_gd(oracle, BaselineConfig("gd", iters=50))
    f = trace.f_values
    assert np.all(np.diff(f) <= 0)
    assert f[10] < f[0] - 0.1
    assert all(row.hess_units == 0 for row in trace)
    assert trace.ledger.grad_units == 50 * oracle.n


def test_gd_line_search_failure():
    class Lying(QuadraticOracle):
        def _grads(self, x, idx):
            return -super()._grads(x, idx)

    oracle = Lying(np.eye(2), np.ones(2))
    with pytest.raises(LineSearchError, match="halvings"):
        run_gd(oracle, BaselineConfig("gd", iters=3, max_halvings=10))


def test_sgd_full_batch_matches_fixed_step_gd():
    oracle, _ = synthetic_strongly_convex(25, 4, 0.1, 3)
    step = 0.05
    x_sgd, trace = run_sgd(oracle, BaselineConfig("sgd", iters=15, step=step, batch=oracle.n))
    x = np.zeros(oracle.d)
    for _ in range(15):
        x = x - step * oracle.grad(x)
    assert np.array_equal(x, x_sgd)
    assert trace.ledger.grad_units == 15 * oracle.n


def test_sgd_reproducible_and_charges_batch():
    oracle = logreg_oracle(synthetic_classification(300, 10, 1), l2=1e-3)
    config = BaselineConfig("sgd", iters=30, step=0.5, batch=7, seed=11)
    x1, t1 = run_sgd(oracle, config)
    x2, t2 = run_sgd(oracle, config)
    assert np.array_equal(x1, x2)
    assert [r.f for r in t1] == [r.f for r in t2]
    assert [r.grad_units for r in t1] == [7 * (t + 1) for t in range(30)]
    assert all(r.hess_units == 0 for r in t1)
    with pytest.raises(ValueError):
        run_sgd(oracle, BaselineConfig("sgd", batch=301))


def test_sgd_mean_decrease_over_seeds():
    oracle, _ = synthetic_strongly_convex(200, 5, 0.5, 2)
    curves = []
    for seed in range(20):
        _, trace = run_sgd(oracle, BaselineConfig("sgd", iters=10, step=0.01, batch=1, seed=seed,
                                                   x0=np.full(5, 2.0)))
        curves.append(trace.f_values)
    mean = np.mean(curves, axis=0)
    assert mean[5] < mean[0] and mean[10] < mean[5]
