"""Cubic regularized Newton methods driven by cheap helper functions."""

from .baselines import BaselineConfig, run_gd, run_sgd
from .costmodel import CostLedger, choose_m, g_lazy, g_vr, ledger_summary
from .cubic_solver import CubicModel, CubicSolverError, CubicStep, SpectralCache, factorize, solve_cubic
from .estimators import EstimatorConfig, HelperEstimator, measure_similarity
from .optimizer import (DivergenceError, RunConfig, StationarityMeasure, StepFailure, Trace, TraceRow, mu_measure,
                        run, select_M, select_output)
from .verify import AuditRecord, RateFit, audit_step, check_grad_dominance, fit_rate

__version__ = "0.1.0"

__all__ = [
    "AuditRecord", "BaselineConfig", "CostLedger", "CubicModel", "CubicSolverError", "CubicStep",
    "DivergenceError", "EstimatorConfig", "HelperEstimator", "RateFit", "RunConfig", "SpectralCache",
    "StationarityMeasure", "StepFailure", "Trace", "TraceRow", "audit_step", "check_grad_dominance", "choose_m",
    "factorize", "fit_rate", "g_lazy", "g_vr", "ledger_summary", "measure_similarity", "mu_measure", "run",
    "run_gd", "run_sgd", "select_M", "select_output", "solve_cubic",
]
