"""Arithmetic-cost accounting in gradient-equivalent units.

One component Hessian is charged ``d_eff`` component gradients.  ``g_vr`` and
``g_lazy`` are the per-round cost objectives whose minimizer over the inner
loop length ``m`` gives the cheapest schedule for each method.
"""

from dataclasses import dataclass, fields
from fractions import Fraction
import math

import numpy as np

__all__ = ["CostLedger", "choose_m", "g_lazy", "g_vr", "ledger_summary"]


@dataclass
class CostLedger:
    d_eff: float = 1.0
    grad_units: int = 0
    hess_units: int = 0
    factorizations: int = 0
    audit_grad_units: int = 0
    audit_hess_units: int = 0
    helper_grad_units: int = 0
    helper_hess_units: int = 0

    def __post_init__(self):
        if not self.d_eff > 0:
            raise ValueError(f"d_eff must be positive, got {self.d_eff}")

    @property
    def gradcost_total(self):
        return self.grad_units + self.d_eff * self.hess_units

    def charge(self, grad=0, hess=0, factorizations=0, helper_grad=0, helper_hess=0):
        if min(grad, hess, factorizations, helper_grad, helper_hess) < 0:
            raise ValueError("cost counters only increase")
        self.grad_units += grad
        self.hess_units += hess
        self.factorizations += factorizations
        self.helper_grad_units += helper_grad
        self.helper_hess_units += helper_hess

    def charge_audit(self, grad=0, hess=0):
        if min(grad, hess) < 0:
            raise ValueError("cost counters only increase")
        self.audit_grad_units += grad
        self.audit_hess_units += hess

    def merge(self, other):
        if other.d_eff != self.d_eff:
            raise ValueError("cannot merge ledgers with different d_eff")
        for f in fields(self):
            if f.name.endswith("_units") or f.name == "factorizations":
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def copy(self):
        return CostLedger(**{f.name: getattr(self, f.name) for f in fields(self)})


def ledger_summary(ledger):
    return {
        "gradcost_total": ledger.gradcost_total,
        "grad_units": ledger.grad_units,
        "hess_units": ledger.hess_units,
        "factorizations": ledger.factorizations,
        "d_eff": ledger.d_eff,
        "helper_grad_units": ledger.helper_grad_units,
        "helper_hess_units": ledger.helper_hess_units,
        "audit_grad_units": ledger.audit_grad_units,
        "audit_hess_units": ledger.audit_hess_units,
    }


def _check(n, d, m):
    if min(n, d, m) < 1:
        raise ValueError(f"n, d, m must be >= 1, got {(n, d, m)}")


def g_vr(n, d, m):
    """``(d n + d min(m^3, n m) + min(m^5, n m)) / m`` as an exact rational."""
    _check(n, d, m)
    return Fraction(d * n + d * min(m**3, n * m) + min(m**5, n * m), m)


def g_lazy(n, d, m):
    """``(n d + min(m^3, m n)) / sqrt(m)``.

    The numerator is exact; the square root makes the value irrational in
    general, so it is returned as a float computed from the exact numerator.
    """
    _check(n, d, m)
    return (n * d + min(m**3, m * n)) / math.sqrt(m)


def _lazy_key(n, d, m):
    # compare num/sqrt(m) exactly through num^2/m
    num = n * d + min(m**3, m * n)
    return Fraction(num * num, m)


_CHUNK = 1 << 20


def _float_objective(n, d, m, method):
    m = m.astype(float)
    if method == "vr":
        return (d * n + d * np.minimum(m**3, n * m) + np.minimum(m**5, n * m)) / m
    return (n * d + np.minimum(m**3, m * n)) / np.sqrt(m)


def choose_m(n, d, method):
    """Exhaustive integer minimization of the cost objective over ``m in [1, n d]``.

    The whole range is scanned in floating point; every ``m`` within a relative
    1e-9 of the float minimum is then re-ranked exactly, ties going to the
    smaller ``m``.  Returns ``(m_star, cost_star)``.
    """
    n, d = int(n), int(d)
    if min(n, d) < 1:
        raise ValueError(f"n, d must be >= 1, got {(n, d)}")
    if method == "vr":
        exact, value = (lambda m: g_vr(n, d, m)), (lambda m: g_vr(n, d, m))
    elif method == "lazy":
        exact, value = (lambda m: _lazy_key(n, d, m)), (lambda m: g_lazy(n, d, m))
    else:
        raise ValueError(f"unknown method {method!r}")
    upper = n * d
    lowest = np.inf
    candidates = []
    for start in range(1, upper + 1, _CHUNK):
        ms = np.arange(start, min(start + _CHUNK, upper + 1), dtype=np.int64)
        vals = _float_objective(n, d, ms, method)
        chunk_min = vals.min()
        if chunk_min <= lowest * (1 + 1e-9):
            lowest = min(lowest, chunk_min)
            candidates = [m for m in candidates if m[1] <= lowest * (1 + 1e-9)]
            keep = vals <= lowest * (1 + 1e-9)
            candidates.extend(zip(ms[keep].tolist(), vals[keep].tolist()))
    best = min((m for m, _ in candidates), key=lambda m: (exact(m), m))
    return best, value(best)
