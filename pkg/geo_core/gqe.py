# geo_core/gqe.py
"""
Generalized quasi-Einstein structures: Ric + nabla^2 f - mu df (x) df = lambda g.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .curvature import (
    ExprLike,
    MetricField,
    MetricJet,
    ScalarFieldJets,
    einstein_residual,
    metric_jet,
    ricci,
    scalar,
)
from .errors import DimensionError, GeometryError
from .expr import ScalarExpr, as_expr
from .tensor import COV, Residual, TensorValue, norm

logger = logging.getLogger(__name__)

MetricSource = Union[MetricField, MetricJet]


@dataclass(frozen=True, eq=False)
class GQEData:
    f: ScalarExpr
    mu: ScalarExpr
    lam: ScalarExpr

    @classmethod
    def build(cls, f: ExprLike, mu: ExprLike, lam: ExprLike, dim: int) -> "GQEData":
        return cls(as_expr(f, dim), as_expr(mu, dim), as_expr(lam, dim))

    @property
    def dim(self) -> int:
        return self.f.dim


def _jet(M: MetricSource, point: Optional[Sequence[float]]) -> MetricJet:
    if isinstance(M, MetricJet):
        return M
    return metric_jet(M, point)


def _cov(arr: np.ndarray, n: int) -> TensorValue:
    return TensorValue(arr, (COV,) * np.ndim(arr), n)


def gqe_residual(M: MetricSource, data: GQEData, point: Optional[Sequence[float]] = None) -> Residual:
    """Ric + nabla^2 f - mu df (x) df - lambda g."""
    jet = _jet(M, point)
    n = jet.dim
    p = jet.point
    fj = ScalarFieldJets(data.f, jet)
    df = fj.df.value
    Ric = ricci(jet)
    hess = _cov(fj.hessian.value, n)
    radial = _cov(data.mu(p) * np.outer(df, df), n)
    trace_term = jet.metric.tensor * data.lam(p)
    return Residual(Ric + hess - radial - trace_term, (Ric, hess, radial, trace_term), jet.metric)


def trace_residual(M: MetricSource, data: GQEData, point: Optional[Sequence[float]] = None) -> float:
    """|g^ab E_ab - (R + Lap f - mu |df|^2 - n lambda)| scaled by 1 + |R| + |Lap f|."""
    jet = _jet(M, point)
    p = jet.point
    fj = ScalarFieldJets(data.f, jet)
    E = gqe_residual(jet, data).tensor.components
    full_trace = float(np.einsum("ab,ab->", jet.metric.g_inv, E))
    R = scalar(jet)
    expected = R + fj.laplacian - data.mu(p) * fj.grad_norm_sq - jet.dim * data.lam(p)
    return abs(full_trace - expected) / (1.0 + abs(R) + abs(fj.laplacian))


@dataclass(frozen=True)
class MuLambdaFit:
    mu: Optional[float]   # None when df vanishes and mu is undetermined
    lam: float
    residual: float
    grad_norm: float

    @property
    def regular(self) -> bool:
        return self.mu is not None


def fit_mu_lambda(M: MetricSource, f: ExprLike, point: Optional[Sequence[float]] = None) -> MuLambdaFit:
    """Least squares in the g inner product for A - mu B - lambda g, A = Ric + nabla^2 f, B = df (x) df."""
    jet = _jet(M, point)
    n = jet.dim
    fj = ScalarFieldJets(f, jet)
    g, g_inv = jet.metric.g, jet.metric.g_inv
    A = ricci(jet).components + fj.hessian.value
    B = np.outer(fj.df.value, fj.df.value)
    grad_sq = fj.grad_norm_sq
    grad_norm = float(np.sqrt(max(grad_sq, 0.0)))
    trace_A = float(np.einsum("ab,ab->", g_inv, A))
    if grad_norm <= settings.REGULAR_POINT_THRESHOLD:
        mu, lam = None, trace_A / n
        leftover = A - lam * g
    else:
        A_BB = float(fj.gradient_up @ A @ fj.gradient_up)
        normal = np.array([[grad_sq ** 2, grad_sq], [grad_sq, float(n)]])
        mu, lam = (float(x) for x in np.linalg.solve(normal, np.array([A_BB, trace_A])))
        leftover = A - mu * B - lam * g
    return MuLambdaFit(mu, lam, norm(_cov(leftover, n), jet.metric), grad_norm)


def radial_weyl(M: MetricSource, f: ExprLike, point: Optional[Sequence[float]] = None) -> Tuple[TensorValue, float]:
    """W_abcd nabla^a f and its g-norm."""
    jet = _jet(M, point)
    n = jet.dim
    if n < 3:
        raise DimensionError("Radial Weyl curvature needs dimension >= 3")
    grad_up = ScalarFieldJets(f, jet).gradient_up
    rw = _cov(np.einsum("a,abcd->bcd", grad_up, jet.curvature.weyl.value), n)
    return rw, norm(rw, jet.metric)


@dataclass
class GQEClass:
    tag: str                      # trivial | gradient-soliton | almost-soliton | quasi-einstein | generic | not-gqe
    subtag: Optional[str] = None  # shrinking | steady | expanding for solitons
    einstein: bool = False
    max_residual: float = 0.0
    worst_point: Optional[Tuple[float, ...]] = None
    mu_range: Tuple[float, float] = (0.0, 0.0)
    lambda_range: Tuple[float, float] = (0.0, 0.0)
    max_grad_norm: float = 0.0
    residuals: List[float] = field(default_factory=list)

    @property
    def label(self) -> str:
        return f"{self.tag}({self.subtag})" if self.subtag else self.tag


def _constant(values: np.ndarray, tol: float) -> bool:
    return float(values.max() - values.min()) <= tol * (1.0 + float(np.max(np.abs(values))))


def classify(
    M: MetricField,
    data: GQEData,
    samples: Sequence[Sequence[float]],
    residual_tol: Optional[float] = None,
    constancy_tol: Optional[float] = None,
) -> GQEClass:
    residual_tol = settings.TOL_GQE_RESIDUAL if residual_tol is None else residual_tol
    constancy_tol = settings.TOL_CONSTANCY if constancy_tol is None else constancy_tol
    if len(samples) == 0:
        raise GeometryError("classify needs at least one sample point")

    residuals, grads, mus, lams, scalars, einstein = [], [], [], [], [], []
    for p in samples:
        jet = metric_jet(M, p)
        residuals.append(gqe_residual(jet, data).value)
        grads.append(np.sqrt(max(ScalarFieldJets(data.f, jet).grad_norm_sq, 0.0)))
        mus.append(data.mu(p))
        lams.append(data.lam(p))
        scalars.append(scalar(jet))
        einstein.append(einstein_residual(jet).value)
    residuals = np.array(residuals)
    worst = int(np.argmax(residuals))
    mus, lams = np.array(mus), np.array(lams)
    is_einstein = bool(np.max(einstein) <= residual_tol and _constant(np.array(scalars), constancy_tol))
    out = GQEClass(
        tag="generic",
        einstein=is_einstein,
        max_residual=float(residuals[worst]),
        worst_point=tuple(float(x) for x in samples[worst]),
        mu_range=(float(mus.min()), float(mus.max())),
        lambda_range=(float(lams.min()), float(lams.max())),
        max_grad_norm=float(np.max(grads)),
        residuals=[float(r) for r in residuals],
    )
    if out.max_residual > residual_tol:
        out.tag = "not-gqe"
        logger.info("data does not solve the GQE equation, worst residual %r at %s", out.max_residual, out.worst_point)
        return out

    mu_zero = float(np.max(np.abs(mus))) <= constancy_tol
    mu_const = _constant(mus, constancy_tol)
    lam_const = _constant(lams, constancy_tol)
    if out.max_grad_norm <= settings.REGULAR_POINT_THRESHOLD:
        out.tag = "trivial"
    elif mu_zero and lam_const:
        out.tag = "gradient-soliton"
        lam = float(np.mean(lams))
        if abs(lam) <= constancy_tol:
            out.subtag = "steady"
        else:
            out.subtag = "shrinking" if lam > 0 else "expanding"
    elif mu_zero:
        out.tag = "almost-soliton"
    elif mu_const and lam_const:
        out.tag = "quasi-einstein"
    return out
