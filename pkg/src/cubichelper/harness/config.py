"""Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored.  Every key is typed by ``SCHEMA``;
``build_problem`` and ``build_method`` turn a parsed mapping into an oracle
and a run configuration.  Example::

    problem = logreg
    data = synthetic
    n = 2000
    d = 50
    l2 = 1e-3
    method = cubic
    variant = lazy_vr
    m = 10
    S = 5
    M = L
    delta1 = 0.0
    delta2 = 0.1
    seed = 7
"""

import numpy as np

from ..baselines import BaselineConfig
from ..estimators import EstimatorConfig
from ..optimizer import RunConfig
from ..problems import (LibSVMParseError, diag_nn_oracle, load_libsvm, logreg_nonconvex_oracle, logreg_oracle,
                        synthetic_classification, synthetic_regression, synthetic_strongly_convex)


class ConfigError(ValueError):
    pass


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    return None if text.strip().lower() in ("", "none", "auto") else int(text)


def _optional_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


def _M(text):
    # "auto" selects M from the similarity constants, "L" uses the oracle's constant
    lowered = text.strip().lower()
    if lowered in ("auto", "l"):
        return lowered.replace("l", "L")
    return float(text)


def _vector(text):
    parts = [p for p in text.replace(",", " ").split() if p]
    return np.array([float(p) for p in parts])


SCHEMA = {
    # problem
    "problem": str, "data": str, "n": int, "d": int, "n_features": _optional_int, "l2": float, "lam": float,
    "mu": float, "noise": float, "box": float, "flip": float, "data_seed": int,
    # method
    "method": str, "variant": str, "m": int, "S": int, "M": _M, "snapshot_policy": str, "b_g": _optional_int,
    "b_h": _optional_int, "resample_each_step": _bool, "delta1": _optional_float, "delta2": _optional_float,
    "M_rule": str, "tol_subproblem": float, "x0": _vector, "seed": int, "track_mu": _bool, "audit": _bool,
    "d_eff": _optional_float,
    # baselines
    "iters": int, "step": float, "batch": int, "init_step": float, "c_armijo": float, "backtrack_factor": float,
    # output
    "output": str, "timing": _bool,
}

DEFAULTS = {"problem": "logreg", "data": "synthetic", "n": 2000, "d": 50, "l2": 1e-3, "lam": 1e-3, "mu": 0.1,
            "noise": 0.1, "box": 2.0, "flip": 0.1, "data_seed": 0, "method": "cubic", "variant": "exact", "M": "L",
            "seed": 0, "timing": False}


def parse_value(key, text):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return SCHEMA[key](text.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def parse_config_text(text, source="<config>"):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            values[key] = parse_value(key, value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return values


def load_config(path=None, overrides=()):
    """Defaults, then the file at ``path``, then ``key=value`` overrides."""
    values = dict(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values.update(parse_config_text(text, str(path)))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        values[key.strip()] = parse_value(key.strip(), value)
    return values


def load_dataset(values, kind="classification"):
    source = values["data"]
    if source == "synthetic":
        if kind == "regression":
            return synthetic_regression(values["n"], values["d"], values["data_seed"], values["noise"])
        return synthetic_classification(values["n"], values["d"], values["data_seed"], values["flip"])
    try:
        return load_libsvm(source, values.get("n_features"))
    except (OSError, LibSVMParseError) as exc:
        raise ConfigError(f"cannot read data file {source}: {exc}") from None


def build_problem(values):
    problem = values["problem"]
    if problem == "logreg":
        return logreg_oracle(load_dataset(values), l2=values["l2"])
    if problem == "logreg_nonconvex":
        return logreg_nonconvex_oracle(load_dataset(values), lam=values["lam"])
    if problem == "diag_nn":
        return diag_nn_oracle(load_dataset(values, "regression"), lam=values["lam"], box=values["box"],
                              seed=values["data_seed"])
    if problem == "quadratic":
        oracle, _ = synthetic_strongly_convex(values["n"], values["d"], values["mu"], values["data_seed"])
        return oracle
    raise ConfigError(f"unknown problem {problem!r}")


_RUN_KEYS = ("m", "S", "M", "snapshot_policy", "delta1", "delta2", "M_rule", "tol_subproblem", "x0", "seed",
             "track_mu", "audit", "d_eff")
_BASELINE_KEYS = ("iters", "step", "batch", "init_step", "c_armijo", "backtrack_factor", "seed", "x0", "d_eff")


def build_method(values, oracle=None):
    """A ``RunConfig`` (method = cubic) or ``BaselineConfig`` (gd, sgd)."""
    method = values["method"]
    if values.get("M") == "L":
        if oracle is None:
            raise ConfigError("M = L needs the problem to be built first")
        # quadratics have L = 0; a tiny M keeps the step a regularized Newton step
        values = dict(values, M=max(oracle.L, 1e-8))
    if values.get("M") == "auto" and (values.get("delta1") is None or values.get("delta2") is None):
        raise ConfigError("M = auto needs delta1 and delta2")
    x0 = values.get("x0")
    if x0 is not None and oracle is not None and x0.size == 1:
        values = dict(values, x0=np.full(oracle.d, x0[0]))
    try:
        if method in ("gd", "sgd"):
            kwargs = {k: values[k] for k in _BASELINE_KEYS if k in values}
            return BaselineConfig(variant=method, **kwargs)
        if method != "cubic":
            raise ConfigError(f"unknown method {method!r}")
        est_kwargs = {k: values[k] for k in ("b_g", "b_h", "resample_each_step") if k in values}
        estimator = EstimatorConfig(variant=values["variant"], seed=values["seed"], **est_kwargs)
        return RunConfig(estimator=estimator, **{k: values[k] for k in _RUN_KEYS if k in values})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
