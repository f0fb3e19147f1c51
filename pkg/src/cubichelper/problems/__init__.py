"""Finite-sum objectives used by the optimizers and experiments."""

from .base import Dataset, FiniteSumOracle, GradDominanceSpec, QuadraticOracle, synthetic_strongly_convex
from .data import random_labels, split_labeled, synthetic_classification, synthetic_regression
from .diagnn import DiagonalNetOracle, diag_nn_oracle, estimate_hessian_lipschitz
from .libsvm import LabelMappingWarning, LibSVMParseError, load_libsvm, parse_libsvm
from .logistic import LogisticOracle, NonconvexLogisticOracle, logreg_nonconvex_oracle, logreg_oracle

__all__ = [
    "Dataset",
    "DiagonalNetOracle",
    "FiniteSumOracle",
    "GradDominanceSpec",
    "LabelMappingWarning",
    "LibSVMParseError",
    "LogisticOracle",
    "NonconvexLogisticOracle",
    "QuadraticOracle",
    "diag_nn_oracle",
    "estimate_hessian_lipschitz",
    "load_libsvm",
    "logreg_nonconvex_oracle",
    "logreg_oracle",
    "parse_libsvm",
    "random_labels",
    "split_labeled",
    "synthetic_classification",
    "synthetic_regression",
    "synthetic_strongly_convex",
]
