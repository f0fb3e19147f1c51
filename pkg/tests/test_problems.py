import io
import math
import warnings

import numpy as np
import pytest

from cubichelper.cubic_solver import factorize, solve_cubic
from cubichelper.problems import (Dataset, GradDominanceSpec, LabelMappingWarning, LibSVMParseError, diag_nn_oracle,
                                  logreg_nonconvex_oracle, logreg_oracle, parse_libsvm, random_labels, split_labeled,
                                  synthetic_classification, synthetic_regression, synthetic_strongly_convex)
from cubichelper.problems.logistic import REG_THIRD
from oracles import fd_grad, fd_hess, rel_err


def small_classification(seed=0):
    return synthetic_classification(40, 6, seed)


def all_oracles():
    data = small_classification()
    reg = synthetic_regression(30, 4, 0)
    quad, _ = synthetic_strongly_convex(30, 5, 0.1, 0)
    return [
        ("logreg", logreg_oracle(data, l2=1e-2)),
        ("nonconvex", logreg_nonconvex_oracle(data, lam=0.5)),
        ("diagnn", diag_nn_oracle(reg, lam=1e-2, lipschitz_pairs=500)),
        ("quadratic", quad),
    ]


@pytest.mark.parametrize("name,oracle", all_oracles())
def test_finite_differences(name, oracle):
    rng = np.random.default_rng(10)
    for _ in range(10):
        x = rng.standard_normal(oracle.d)
        assert rel_err(oracle.grad(x), fd_grad(oracle.value, x)) <= 1e-5
        assert rel_err(oracle.hess(x), fd_hess(oracle.grad, x)) <= 1e-5


@pytest.mark.parametrize("name,oracle", all_oracles())
def test_average_of_components(name, oracle):
    x = np.random.default_rng(11).standard_normal(oracle.d)
    comps = [oracle.f_i(i, x) for i in range(oracle.n)]
    assert oracle.value(x) == pytest.approx(np.mean(comps), rel=1e-12)
    grads = np.mean([oracle.grad_i(i, x) for i in range(oracle.n)], axis=0)
    np.testing.assert_allclose(oracle.grad(x), grads, rtol=1e-12, atol=1e-14)
    hess = np.mean([oracle.hess_i(i, x) for i in range(oracle.n)], axis=0)
    np.testing.assert_allclose(oracle.hess(x), hess, rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("name,oracle", all_oracles()[:3])
def test_component_hessian_lipschitz(name, oracle):
    rng = np.random.default_rng(12)
    box = 2.0
    for _ in range(200):
        x = rng.uniform(-box, box, oracle.d)
        y = x + rng.standard_normal(oracle.d) * 10.0 ** rng.uniform(-3, 0)
        y = np.clip(y, -box, box)
        i = int(rng.integers(oracle.n))
        diff = np.linalg.norm(oracle.hess_i(i, x) - oracle.hess_i(i, y), 2)
        if name == "diagnn":
            diff = np.linalg.norm(oracle.hess(x) - oracle.hess(y), 2)
        assert diff <= oracle.L * np.linalg.norm(x - y) * (1 + 1e-9)


def test_counters_count_components():
    oracle = logreg_oracle(small_classification())
    x = np.zeros(oracle.d)
    oracle.grad(x, [0, 1, 1])
    oracle.hess(x)
    assert (oracle.grad_evals, oracle.hess_evals) == (3, oracle.n)
    oracle.reset_counts()
    assert oracle.grad_evals == oracle.hess_evals == 0


def test_logistic_at_origin():
    data = small_classification()
    oracle = logreg_oracle(data, l2=0.0)
    x = np.zeros(data.d)
    assert oracle.f_i(3, x) == pytest.approx(math.log(2))
    np.testing.assert_allclose(oracle.grad_i(3, x), -data.labels[3] * data.features[3] / 2)


def test_logistic_lipschitz_constant_single_sample():
    oracle = logreg_oracle(Dataset(np.ones((1, 3)), np.ones(1)), l2=0.0)
    assert oracle.L == pytest.approx(0.5, rel=1e-15)


def test_logistic_hessian_ignores_labels():
    data = small_classification()
    flipped = Dataset(data.features, -data.labels)
    a, b = logreg_oracle(data), logreg_oracle(flipped)
    rng = np.random.default_rng(13)
    for _ in range(20):
        x = rng.standard_normal(data.d)
        assert np.abs(a.hess(x) - b.hess(x)).max() <= 1e-12


def test_logistic_rejects_other_labels():
    with pytest.raises(ValueError):
        logreg_oracle(Dataset(np.ones((2, 2)), np.array([0.0, 1.0])))


def test_nonconvex_regularizer_values():
    data = Dataset(np.zeros((1, 1)), np.ones(1))
    oracle = logreg_nonconvex_oracle(data, lam=1.0)
    base = math.log(2)
    assert oracle.value(np.zeros(1)) == pytest.approx(base)
    assert oracle.hess(np.zeros(1))[0, 0] == pytest.approx(2.0)
    one = np.ones(1)
    assert oracle.value(one) - base == pytest.approx(0.5)
    assert oracle.grad(one)[0] == pytest.approx(0.5)
    assert oracle.hess(one)[0, 0] == pytest.approx(-0.5)


def test_regularizer_third_derivative_bound():
    t = np.linspace(-10, 10, 2_000_001)
    third = 24 * t * (t * t - 1) / (1 + t * t) ** 4
    assert np.abs(third).max() == pytest.approx(REG_THIRD, rel=1e-9)
    assert REG_THIRD == pytest.approx(4.66856, abs=1e-5)


def test_diag_nn_zero_branch_and_exact_fit():
    data = synthetic_regression(20, 3, 1)
    oracle = diag_nn_oracle(data, lam=0.0, lipschitz_pairs=100)
    x = np.concatenate([np.zeros(3), np.ones(3)])
    assert oracle.value(x) == pytest.approx(np.mean(data.labels**2))
    np.testing.assert_allclose(oracle.grad(x)[3:], 0.0, atol=1e-15)
    single = diag_nn_oracle(Dataset(np.ones((1, 1)), np.ones(1)), lipschitz_pairs=100)
    assert single.value(np.ones(2)) == 0.0
    np.testing.assert_array_equal(single.grad(np.ones(2)), 0.0)


def test_diag_nn_rejects_wrong_length():
    oracle = diag_nn_oracle(synthetic_regression(10, 2, 0), lipschitz_pairs=50)
    with pytest.raises(ValueError):
        oracle.grad(np.zeros(3))


def test_strongly_convex_quadratic():
    oracle, spec = synthetic_strongly_convex(50, 6, 0.2, 3)
    assert spec == GradDominanceSpec(1 / 0.4, 2.0)
    H = oracle.hess(np.zeros(6))
    x_star = np.linalg.lstsq(H, -oracle.grad(np.zeros(6)), rcond=None)[0]
    assert oracle.f_star == pytest.approx(oracle.value(x_star), abs=1e-9)
    x = np.full(6, 5.0)
    for _ in range(2):
        step = solve_cubic(factorize(oracle.hess(x)), oracle.grad(x), 1e-12)
        x = x + step.s
    assert np.linalg.norm(oracle.grad(x)) <= 1e-10
    rng = np.random.default_rng(14)
    for _ in range(100):
        y = rng.standard_normal(6) * 3
        gap = oracle.value(y) - oracle.f_star
        assert gap <= spec.tau * np.linalg.norm(oracle.grad(y)) ** 2 * (1 + 1e-12)


def test_grad_dominance_spec_validation():
    with pytest.raises(ValueError):
        GradDominanceSpec(0.0, 2.0)
    with pytest.raises(ValueError):
        GradDominanceSpec(1.0, 2.5)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf]]), np.ones(1))
    with pytest.raises(ValueError):
        Dataset(np.ones((2, 2)), np.ones(3))


def test_generators_are_seeded():
    a, b = synthetic_classification(50, 4, 9), synthetic_classification(50, 4, 9)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    lab, unl = split_labeled(a, 1)
    assert lab.n + unl.n == a.n
    assert set(np.unique(random_labels(unl, 2).labels)) <= {-1.0, 1.0}


def test_libsvm_basic_rows():
    data = parse_libsvm(io.StringIO("+1 1:0.5 3:-2\n-1\n"))
    np.testing.assert_array_equal(data.features, [[0.5, 0, -2], [0, 0, 0]])
    np.testing.assert_array_equal(data.labels, [1, -1])


def test_libsvm_zero_one_labels_warn():
    text = "0 1:1\n1 2:1\n1 1:3\n"
    with pytest.warns(LabelMappingWarning):
        data = parse_libsvm(io.StringIO(text))
    assert list(data.labels) == [-1, 1, 1]


def test_libsvm_n_features_override_and_comments():
    data = parse_libsvm(io.StringIO("# header\n1 2:1 # trailing\n"), n_features=5)
    assert data.d == 5
    with pytest.raises(ValueError):
        parse_libsvm(io.StringIO("1 6:1\n"), n_features=5)


@pytest.mark.parametrize("text,line", [
    ("1 1:1\n1 2:x\n", 2),
    ("1 0:1\n", 1),
    ("1 3:1 2:1\n", 1),
    ("1 1:1\nabc 1:1\n", 2),
    ("1 1-1\n", 1),
])
def test_libsvm_errors_carry_line(text, line):
    with pytest.raises(LibSVMParseError) as info:
        parse_libsvm(io.StringIO(text))
    assert info.value.lineno == line
