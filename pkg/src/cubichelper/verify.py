"""Numerical checks of the one-step descent inequalities and convergence rates.

``audit_step`` evaluates the slack of four per-step inequalities for a cubic
step computed from inexact ``(g, H)``; the gradient and Hessian errors are
measured full-batch.  ``fit_rate`` classifies a trace of objective gaps by the
gradient-dominance exponent and checks the matching rate pattern.
"""

from dataclasses import dataclass
import math

import numpy as np


class AuditRefused(ValueError):
    """The step is not an accurate minimizer of its cubic model."""


@dataclass(frozen=True)
class AuditRecord:
    """Slacks of the four per-step inequalities, ``>= 0`` when they hold.

    * ``descent_bound``: decrease >= mu(x+)/(1008 sqrt M) + M r^3/72 minus noise terms
    * ``model_decrease``: decrease >= M r^3/36 minus noise terms
    * ``grad_bound``: ||grad f(x+)||^(3/2)/sqrt M <= 3 M r^3 plus noise terms
    * ``curvature_bound``: (-lambda_min(x+))^3/M^2 <= 14 M r^3 plus a Hessian noise term
    """

    f_x: float
    f_plus: float
    r: float
    grad_error: float
    hess_error: float
    mu_plus: float
    lam_min_plus: float
    descent_bound: float
    model_decrease: float
    grad_bound: float
    curvature_bound: float

    @property
    def tolerance(self):
        return 1e-8 * max(1.0, abs(self.f_x))

    @property
    def slacks(self):
        return {"descent_bound": self.descent_bound, "model_decrease": self.model_decrease,
                "grad_bound": self.grad_bound, "curvature_bound": self.curvature_bound}

    @property
    def ok(self):
        return all(v >= -self.tolerance for v in self.slacks.values())


def _first_order_residual(g, H, M, s):
    r = np.linalg.norm(s)
    scale = np.linalg.norm(g) + M * r * r + np.abs(H).max() * r
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(g + H @ s + 0.5 * M * r * s) / scale)


def audit_step(oracle, x, x_plus, g, H, M, step=None, residual_tol=1e-8):
    """Slacks (right side minus left side, or vice versa, so that >= 0 means
    the inequality holds) for the step ``x -> x_plus`` taken with ``(g, H, M)``.

    Refuses to audit when ``x_plus - x`` is not a minimizer of the cubic model
    to within ``residual_tol``, and when ``M < L``.
    """
    x, x_plus = np.asarray(x, dtype=float), np.asarray(x_plus, dtype=float)
    if M < oracle.L:
        raise ValueError(f"audit needs M >= L, got M={M} < L={oracle.L}")
    s = x_plus - x
    residual = step.residual if step is not None else _first_order_residual(g, H, M, s)
    if residual > residual_tol:
        raise AuditRefused(f"subproblem residual {residual:.3g} exceeds {residual_tol:.3g}")
    if step is None and s.any():
        lam = np.linalg.eigvalsh(H + 0.5 * M * np.linalg.norm(s) * np.eye(len(s)))[0]
        if lam < -1e-8 * max(1.0, abs(lam)):
            raise AuditRefused("step is not a global model minimizer (second-order condition fails)")

    r = float(np.linalg.norm(s))
    f_x, f_plus = oracle.value(x), oracle.value(x_plus)
    e_g = float(np.linalg.norm(oracle.grad(x) - g))
    e_H = float(np.linalg.norm(oracle.hess(x) - H, 2))
    grad_plus = float(np.linalg.norm(oracle.grad(x_plus)) ** 1.5)
    lam_min_plus = float(np.linalg.eigvalsh(oracle.hess(x_plus))[0])
    neg_lam_cubed = (-lam_min_plus) ** 3
    mu = max(grad_plus, neg_lam_cubed / M**1.5)
    sq = math.sqrt(M)
    noise_g, noise_H = e_g**1.5 / sq, e_H**3 / M**2
    descent = f_x - f_plus

    descent_bound = descent - (mu / (1008 * sq) + M * r**3 / 72 - 4 * noise_g - 73 * noise_H)
    model_decrease = descent - (M / 36 * r**3 - 3 * noise_g - 72 * noise_H)
    grad_bound = 3 * M * r**3 + 2 * noise_g + noise_H - grad_plus / sq
    curvature_bound = 14 * M * r**3 + 4 * noise_H - neg_lam_cubed / M**2
    return AuditRecord(f_x, f_plus, r, e_g, e_H, mu, lam_min_plus, descent_bound, model_decrease, grad_bound,
                       curvature_bound)


def check_grad_dominance(oracle, spec, points, f_star=None):
    """Number of points where ``f(x) - f_star > tau ||grad f(x)||^alpha``
    by more than a 1e-9 relative slack."""
    if f_star is None:
        f_star = getattr(oracle, "f_star", None)
    if f_star is None:
        raise ValueError("gradient dominance check needs f_star")
    violations = 0
    for x in points:
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("points must be finite")
        lhs = oracle.value(x) - f_star
        rhs = spec.tau * np.linalg.norm(oracle.grad(x)) ** spec.alpha
        if lhs - rhs > 1e-9 * max(abs(lhs), abs(rhs)) + 1e-13 * max(1.0, abs(f_star)):
            violations += 1
    return violations


@dataclass(frozen=True)
class RateFit:
    gamma: float
    C_hat: float
    a_hat: float
    regime: str
    violations: int
    slope: float = math.nan
    onset: int = -1
    usable: int = 0


def regime_of(alpha):
    if alpha < 1.5:
        return "sublinear"
    if alpha == 1.5:
        return "linear"
    return "superlinear"


def _gaps(trace, f_star):
    if hasattr(trace, "f_values"):
        values = trace.f_values
    else:
        values = np.asarray(trace, dtype=float)
    return values - f_star


def _loglog_slope(t, gaps):
    if len(t) < 3:
        return math.nan
    return float(np.polyfit(np.log(t), np.log(gaps), 1)[0])


def _fit_recurrence(gaps, gamma):
    # F_t - F_{t+1} ~ C F_{t+1}^gamma - a, least squares in (C, a)
    lhs = gaps[:-1] - gaps[1:]
    design = np.column_stack([gaps[1:] ** gamma, -np.ones(len(lhs))])
    (C, a), *_ = np.linalg.lstsq(design, lhs, rcond=None)
    return float(C), float(a)


def fit_rate(trace, f_star, spec, exponent=None, terminal=5, slack=1e-6, burn_in=5, floor=None):
    """Fit the rate pattern of the gaps ``delta_t = f(x_t) - f_star``.

    ``trace`` is a :class:`~cubichelper.optimizer.Trace` or a sequence of
    objective values indexed from ``t = 0``.  Gaps at or below ``floor``
    (default ``1e-13 max(1, |f_star|)``) are dropped as round-off.

    * sublinear (alpha < 3/2): least-squares slope of ``log delta`` against
      ``log t`` over the last half of the iterations after ``burn_in``;
      a violation is recorded when the slope exceeds ``-2 + 0.3``.
    * linear (alpha = 3/2): every transition must contract.
    * superlinear (alpha > 3/2): over the last ``terminal`` transitions,
      ``delta_{t+1} <= delta_t^p (1 + slack)`` with ``p = exponent``
      (default ``2 alpha / 3``).  ``slope`` is the log-log slope of the
      pre-superlinear window ``[burn_in, onset)`` when it has enough points.
    """
    gaps = _gaps(trace, f_star)
    if floor is None:
        floor = 1e-13 * max(1.0, abs(f_star))
    usable_idx = np.flatnonzero(gaps > floor)
    if usable_idx.size < 8:
        raise ValueError(f"trace too short: {usable_idx.size} usable points, need 8")
    last = usable_idx[-1]
    if usable_idx.size != last + 1:
        # keep the leading run of usable points only
        breaks = np.flatnonzero(np.diff(usable_idx) != 1)
        last = usable_idx[breaks[0]] if breaks.size else last
    gaps = gaps[: last + 1]
    t = np.arange(len(gaps))
    if len(gaps) < 8:
        raise ValueError(f"trace too short: {len(gaps)} usable points, need 8")

    gamma = 3.0 / (2.0 * spec.alpha)
    regime = regime_of(spec.alpha)
    C_hat, a_hat = _fit_recurrence(gaps, gamma)

    if regime == "sublinear":
        rest = np.arange(min(burn_in, len(gaps) - 3), len(gaps))
        tail = rest[len(rest) // 2:]
        tail = tail[tail > 0]
        slope = _loglog_slope(t[tail], gaps[tail])
        return RateFit(gamma, C_hat, a_hat, regime, int(not slope <= -1.7), slope, -1, len(gaps))

    if regime == "linear":
        violations = int(np.sum(gaps[1:] > gaps[:-1] * (1 + slack)))
        return RateFit(gamma, C_hat, a_hat, regime, violations, math.nan, 0, len(gaps))

    p = exponent if exponent is not None else 2 * spec.alpha / 3
    ok = (gaps[:-1] < 1) & (gaps[1:] <= gaps[:-1] ** p * (1 + slack))
    window = ok[-terminal:]
    violations = int(np.sum(~window))
    onset = len(ok)
    while onset > 0 and ok[onset - 1]:
        onset -= 1
    pre = t[burn_in:onset]
    pre = pre[pre > 0]
    slope = _loglog_slope(pre, gaps[pre])
    return RateFit(gamma, C_hat, a_hat, regime, violations, slope, int(onset), len(gaps))
