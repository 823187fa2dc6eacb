# geo_core/conformal.py
"""
Conformal rescaling g~ = exp(-2u) g and the transformation laws of Schouten, Cotton and Ricci.

Every right-hand side is computed in the base metric g (gradients raised with g), and every
residual is normed with g.
"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curvature import ExprLike, MetricField, MetricJet, ScalarFieldJets, cotton, metric_jet, riemann, ricci, schouten
from .errors import DimensionError
from .expr import ScalarExpr, as_expr, exp
from .tensor import COV, Residual, TensorValue

logger = logging.getLogger(__name__)


def conformal_metric(M: MetricField, u: ExprLike) -> MetricField:
    """exp(-2u) * g as new expression trees, on the same domain."""
    n = M.dim
    u = as_expr(u, n)
    factor = exp(u * -2.0)
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            entry = M.entries[i][j]
            scaled = entry if entry.is_zero else factor * entry
            rows[i][j] = rows[j][i] = scaled
    return M.with_entries(rows, name=f"exp(-2*({u}))*{M.name}")


@dataclass(frozen=True, eq=False)
class ConformalPair:
    base: MetricField
    u: ScalarExpr
    rescaled: MetricField

    @classmethod
    def build(cls, M: MetricField, u: ExprLike) -> "ConformalPair":
        u = as_expr(u, M.dim)
        return cls(M, u, conformal_metric(M, u))

    def jets(self, point: Sequence[float]):
        """(base jet, rescaled jet, potential jets in the base metric) at one point."""
        base = metric_jet(self.base, point)
        return base, metric_jet(self.rescaled, point), ScalarFieldJets(self.u, base)


def _cov(arr: np.ndarray, n: int) -> TensorValue:
    return TensorValue(arr, (COV,) * np.ndim(arr), n)


def schouten_conformal_residual(pair: ConformalPair, point: Sequence[float]) -> Residual:
    """S~ - [S + nabla^2 u + du (x) du - 1/2 |du|^2 g]."""
    base, tilde, u = pair.jets(point)
    n = base.dim
    du = u.df.value
    hess = _cov(u.hessian.value, n)
    dudu = _cov(np.outer(du, du), n)
    S = schouten(base)
    S_tilde = schouten(tilde)
    predicted = S + hess + dudu - base.metric.tensor * (0.5 * u.grad_norm_sq)
    return Residual(S_tilde - predicted, (S_tilde, S, hess, dudu), base.metric)


def _weyl_along(base: MetricJet, grad_up: np.ndarray) -> np.ndarray:
    """W_dabc v^d."""
    return np.einsum("d,dabc->abc", grad_up, base.curvature.weyl.value)


def cotton_conformal_residual(pair: ConformalPair, point: Sequence[float]) -> Residual:
    """C~ - C - (n-2) W_dabc nabla^d u."""
    base, tilde, u = pair.jets(point)
    n = base.dim
    if n < 3:
        raise DimensionError("The conformal Cotton law needs dimension >= 3")
    C = cotton(base)
    C_tilde = cotton(tilde)
    weyl_term = _cov((n - 2.0) * _weyl_along(base, u.gradient_up), n)
    return Residual(C_tilde - C - weyl_term, (C_tilde, C, weyl_term), base.metric)


def cotton_conformal_gqe_residual(M: MetricField, f: ExprLike, point: Sequence[float]) -> Residual:
    """The same law with u = f/(n-2): C~ - C - W_dabc nabla^d f."""
    n = M.dim
    f = as_expr(f, n)
    pair = ConformalPair.build(M, f * (1.0 / (n - 2.0)))
    base, tilde, _ = pair.jets(point)
    grad_f = ScalarFieldJets(f, base).gradient_up
    C = cotton(base)
    C_tilde = cotton(tilde)
    weyl_term = _cov(_weyl_along(base, grad_f), n)
    return Residual(C_tilde - C - weyl_term, (C_tilde, C, weyl_term), base.metric)


def _gqe_conformal_pair(M: MetricField, f: ScalarExpr) -> ConformalPair:
    n = M.dim
    if n < 3:
        raise DimensionError("The conformal Ricci law needs dimension >= 3")
    return ConformalPair.build(M, f * (1.0 / (n - 2.0)))


def ricci_conformal_residual(M: MetricField, f: ExprLike, point: Sequence[float]) -> Residual:
    """
    Ric~ - [Ric + nabla^2 f + df (x) df/(n-2) + (Lap f - |df|^2) g/(n-2)]
    for g~ = exp(-2f/(n-2)) g.
    """
    n = M.dim
    f = as_expr(f, n)
    pair = _gqe_conformal_pair(M, f)
    base = metric_jet(M, point)
    tilde = metric_jet(pair.rescaled, point)
    fj = ScalarFieldJets(f, base)
    df = fj.df.value
    Ric = ricci(base)
    Ric_tilde = ricci(tilde)
    hess = _cov(fj.hessian.value, n)
    dfdf = _cov(np.outer(df, df) / (n - 2.0), n)
    trace_term = base.metric.tensor * ((fj.laplacian - fj.grad_norm_sq) / (n - 2.0))
    predicted = Ric + hess + dfdf + trace_term
    return Residual(Ric_tilde - predicted, (Ric_tilde, Ric, hess, dfdf, trace_term), base.metric)


def ricci_conformal_gqe_residual(M: MetricField, data, point: Sequence[float]) -> Residual:
    """
    For (g, f, mu, lambda) solving Ric + nabla^2 f - mu df (x) df = lambda g:
    Ric~ - (mu + 1/(n-2)) df (x) df - (Lap f - |df|^2 + (n-2) lambda)/(n-2) * exp(2f/(n-2)) g~.
    """
    n = M.dim
    pair = _gqe_conformal_pair(M, data.f)
    base = metric_jet(M, point)
    tilde = metric_jet(pair.rescaled, point)
    fj = ScalarFieldJets(data.f, base)
    df = fj.df.value
    mu = data.mu(point)
    lam = data.lam(point)
    Ric_tilde = ricci(tilde)
    radial = _cov((mu + 1.0 / (n - 2.0)) * np.outer(df, df), n)
    back = float(np.exp(2.0 * fj.value / (n - 2.0)))
    trace_term = tilde.metric.tensor * (back * (fj.laplacian - fj.grad_norm_sq + (n - 2.0) * lam) / (n - 2.0))
    return Residual(Ric_tilde - radial - trace_term, (Ric_tilde, radial, trace_term), base.metric)


def composition_residual(M: MetricField, u: ExprLike, v: ExprLike, point: Sequence[float]) -> Residual:
    """Riemann of (g rescaled by u, then by v) minus Riemann of g rescaled by u + v."""
    n = M.dim
    u, v = as_expr(u, n), as_expr(v, n)
    twice = conformal_metric(conformal_metric(M, u), v)
    once = conformal_metric(M, u + v)
    j_twice = metric_jet(twice, point)
    j_once = metric_jet(once, point)
    R_twice = riemann(j_twice)
    R_once = riemann(j_once)
    return Residual(R_twice - R_once, (R_twice, R_once), j_once.metric)
