"""Desk-scale experiment presets.

Each preset writes one trace CSV per method into ``outdir`` plus a
``summary.csv``.  Methods run one after another in a fixed order, each with
its own ledger, so reruns with the same seed give identical files (wall
times are zeroed unless ``timing=True``).
"""

from dataclasses import dataclass, field
import logging
import math
from pathlib import Path

import numpy as np

from ..baselines import BaselineConfig, run_gd, run_sgd
from ..costmodel import choose_m
from ..estimators import EstimatorConfig
from ..optimizer import RunConfig, run
from ..problems import (diag_nn_oracle, logreg_nonconvex_oracle, logreg_oracle, random_labels, split_labeled,
                        synthetic_classification, synthetic_regression)
from .csvio import write_table_csv, write_trace_csv

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("method", "iters", "final_f", "best_f", "gradcost_total", "grad_units", "hess_units",
                   "factorizations", "helper_grad_units", "target_f", "gradcost_to_target")


@dataclass
class ExperimentPreset:
    name: str
    oracle: object
    methods: list = field(default_factory=list)
    repetitions: int = 1
    output: Path = None

    def __post_init__(self):
        names = [name for name, _ in self.methods]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate method names in preset {self.name}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def run_method(oracle, config):
    if isinstance(config, BaselineConfig):
        return (run_gd if config.variant == "gd" else run_sgd)(oracle, config)
    return run(oracle, config)


def _gradcost_to(trace, target):
    for row in trace:
        if row.f <= target:
            return row.gradcost_total
    return math.nan


def summarize(name, trace, target=math.nan):
    last = trace[-1] if len(trace) else None
    ledger = trace.ledger
    return {
        "method": name,
        "iters": len(trace),
        "final_f": last.f if last else trace.f0,
        "best_f": min([trace.f0] + [row.f for row in trace]),
        "gradcost_total": float(ledger.gradcost_total),
        "grad_units": ledger.grad_units,
        "hess_units": ledger.hess_units,
        "factorizations": ledger.factorizations,
        "helper_grad_units": ledger.helper_grad_units,
        "target_f": target,
        "gradcost_to_target": _gradcost_to(trace, target),
    }


def execute(preset, timing=False):
    """Run every method of ``preset``; returns ``{method: trace}`` and writes CSVs."""
    out = Path(preset.output) if preset.output is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    traces = {}
    for name, config in preset.methods:
        logger.info("%s: running %s", preset.name, name)
        _, trace = run_method(preset.oracle, config)
        traces[name] = trace
        if out is not None:
            write_trace_csv(trace, trace.ledger, out / f"{name}.csv", timing=timing)
    return traces


def write_summary(traces, path, target=math.nan):
    rows = [summarize(name, traces[name], target) for name in sorted(traces)]
    write_table_csv(rows, SUMMARY_COLUMNS, path)
    return rows


def default_classification(n=2000, d=50, seed=0):
    """Offline stand-in for a9a: Gaussian features with a planted separator."""
    return synthetic_classification(n, d, seed)


def lazy_vs_vr_methods(oracle, m=10, S=5, seed=0, scn_batch=100, sgd_step=0.5, sgd_batch=10):
    iters = m * S
    n = oracle.n
    cubic = dict(m=m, S=S, M=oracle.L, seed=seed)
    return [
        ("full_vr", RunConfig(estimator=EstimatorConfig("vr"), **cubic)),
        ("lazy_vr", RunConfig(estimator=EstimatorConfig("lazy_vr"), **cubic)),
        ("scn", RunConfig(estimator=EstimatorConfig("basic", b_g=min(scn_batch, n), b_h=min(scn_batch, n)),
                          **cubic)),
        ("cn", RunConfig(estimator=EstimatorConfig("exact"), **cubic)),
        ("gd", BaselineConfig("gd", iters=iters)),
        ("sgd", BaselineConfig("sgd", iters=iters, step=sgd_step, batch=min(sgd_batch, n), seed=seed)),
    ]


def preset_lazy_vs_vr(data=None, seed=0, outdir=None, m=10, S=5, l2=1e-3, timing=False):
    """Full VR, Lazy VR, stochastic CN, exact CN, GD and SGD on logistic regression.

    All methods start at zero and run ``m * S`` iterations.  The summary
    reports, per method, the gradient-equivalent cost to reach the exact
    method's final value plus 1e-3.
    """
    data = data if data is not None else default_classification(seed=seed)
    oracle = logreg_oracle(data, l2=l2)
    outdir = Path(outdir) if outdir is not None else None
    preset = ExperimentPreset("lazy-vs-vr", oracle, lazy_vs_vr_methods(oracle, m, S, seed), output=outdir)
    traces = execute(preset, timing)
    target = traces["cn"][-1].f + 1e-3 if len(traces["cn"]) else math.nan
    summary = write_summary(traces, outdir / "summary.csv", target) if outdir is not None else None
    return traces, summary


def auxiliary_problem(data, seed=0, l2=1e-3):
    """Logistic loss on the labeled half, helper with random labels on the other half."""
    labeled, unlabeled = split_labeled(data, seed)
    main = logreg_oracle(labeled, l2=l2)
    helper = logreg_oracle(random_labels(unlabeled, seed), l2=l2)
    return main, helper


def preset_auxiliary(data=None, m_values=(1, 2, 4, 8), seed=0, outdir=None, S=3, l2=1e-3, timing=False):
    """Cubic Newton driven by an unlabeled-data helper for each ``m``.

    Every round evaluates the labeled objective once, at the snapshot, so
    ``S`` rounds give every ``m`` the same labeled-access budget; ``m = 1`` is
    plain cubic Newton.
    """
    data = data if data is not None else default_classification(seed=seed)
    main, helper = auxiliary_problem(data, seed, l2)
    M = max(main.L, helper.L)
    methods = [(f"aux_m{m}", RunConfig(m=m, S=S, M=M, seed=seed, estimator=EstimatorConfig("auxiliary", helper=helper)))
               for m in m_values]
    outdir = Path(outdir) if outdir is not None else None
    traces = execute(ExperimentPreset("auxiliary", main, methods, output=outdir), timing)
    summary = write_summary(traces, outdir / "summary.csv") if outdir is not None else None
    return traces, summary


def preset_nonconvex_reg(data=None, seed=0, outdir=None, m=10, S=5, lam=1e-3, timing=False):
    """Logistic loss with the nonconvex regularizer, tracking the stationarity measure."""
    data = data if data is not None else default_classification(seed=seed)
    oracle = logreg_nonconvex_oracle(data, lam=lam)
    base = dict(m=m, S=S, M=oracle.L, seed=seed, track_mu=True)
    methods = [
        ("cn", RunConfig(estimator=EstimatorConfig("exact"), **base)),
        ("full_vr", RunConfig(estimator=EstimatorConfig("vr"), **base)),
        ("lazy_vr", RunConfig(estimator=EstimatorConfig("lazy_vr"), **base)),
        ("gd", BaselineConfig("gd", iters=m * S)),
    ]
    outdir = Path(outdir) if outdir is not None else None
    traces = execute(ExperimentPreset("nonconvex-reg", oracle, methods, output=outdir), timing)
    summary = write_summary(traces, outdir / "summary.csv") if outdir is not None else None
    return traces, summary


def preset_diag_nn(data=None, seed=0, outdir=None, m=5, S=8, lam=1e-3, timing=False):
    """Two-layer diagonal network on synthetic regression from a random start."""
    data = data if data is not None else synthetic_regression(1000, 10, seed)
    oracle = diag_nn_oracle(data, lam=lam, seed=seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x0 = 0.5 * rng.standard_normal(oracle.d)
    base = dict(m=m, S=S, M=oracle.L, seed=seed, x0=x0, track_mu=True)
    methods = [
        ("cn", RunConfig(estimator=EstimatorConfig("exact"), **base)),
        ("lazy_exact", RunConfig(estimator=EstimatorConfig("lazy_exact"), **base)),
        ("lazy_vr", RunConfig(estimator=EstimatorConfig("lazy_vr"), **base)),
        ("gd", BaselineConfig("gd", iters=m * S, x0=x0)),
    ]
    outdir = Path(outdir) if outdir is not None else None
    traces = execute(ExperimentPreset("diag-nn", oracle, methods, output=outdir), timing)
    summary = write_summary(traces, outdir / "summary.csv") if outdir is not None else None
    return traces, summary


CROSSOVER_COLUMNS = ("n", "d", "m_vr", "cost_vr", "m_lazy", "cost_lazy", "lazy_wins", "closed_vr", "closed_lazy")
CROSSOVER_NS = (100, 1000, 10000)
CROSSOVER_DS = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000)


def closed_form_vr(n, d):
    return min((n * d) ** 0.8, n ** (2 / 3) * d + n)


def closed_form_lazy(n, d):
    return min((n * d) ** (5 / 6), n * math.sqrt(d))


def crossover_table(ns=CROSSOVER_NS, ds=CROSSOVER_DS):
    rows = []
    for n in ns:
        for d in ds:
            if d > n:
                continue
            m_vr, c_vr = choose_m(n, d, "vr")
            m_lazy, c_lazy = choose_m(n, d, "lazy")
            rows.append({"n": n, "d": d, "m_vr": m_vr, "cost_vr": float(c_vr), "m_lazy": m_lazy,
                         "cost_lazy": float(c_lazy), "lazy_wins": c_lazy <= c_vr,
                         "closed_vr": closed_form_vr(n, d), "closed_lazy": closed_form_lazy(n, d)})
    return rows


def preset_crossover(outdir=None, ns=CROSSOVER_NS, ds=CROSSOVER_DS):
    rows = crossover_table(ns, ds)
    if outdir is not None:
        Path(outdir).mkdir(parents=True, exist_ok=True)
        write_table_csv(rows, CROSSOVER_COLUMNS, Path(outdir) / "crossover.csv")
    return rows


PRESETS = {
    "lazy-vs-vr": preset_lazy_vs_vr,
    "auxiliary": preset_auxiliary,
    "nonconvex-reg": preset_nonconvex_reg,
    "diag-nn": preset_diag_nn,
    "crossover": preset_crossover,
}
