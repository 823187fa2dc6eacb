# geo_core/curvature.py
"""
Curvature of a chart metric at a point, computed from order-3 metric jets.

Sign convention: R^d_abc = d_b G^d_ac - d_a G^d_bc + G^e_ac G^d_be - G^e_bc G^d_ae and
R_abcd = g_de R^e_abc, so that the unit sphere has R_abcd = g_ac g_bd - g_ad g_bc.

Layouts (0-based, derivative index always last):
    christoffel[c, a, b] = G^c_ab
    nabla_ricci[a, b, c] = nabla_c R_ab
    nabla_weyl[a, b, c, d, e] = nabla_e W_abcd
    hessian[a, b] = nabla_b d_a f
    third[a, b, c] = nabla_c nabla_b nabla_a f
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ChartDomainError, DimensionError, JetDomainError, MissingDerivativeError
from .expr import JetEvaluator, Number, ScalarExpr, as_expr, evaluate
from .jets import TensorJet
from .tensor import CON, COV, MetricAtPoint, Residual, TensorValue, Variance, contract

logger = logging.getLogger(__name__)

_SLOT_LETTERS = "abcdefgh"

ExprLike = Union[str, Number, ScalarExpr]


# ---------------------------------------------------------------------------
# Metric fields and jets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricField:
    """
    A metric on one chart: an n x n symmetric array of expressions plus a domain.

    The chart domain is {p in box : every constraint(p) > 0}. The box is also the
    sampling box used to draw points.
    """

    entries: Tuple[Tuple[ScalarExpr, ...], ...]
    constraints: Tuple[ScalarExpr, ...] = ()
    box: Optional[Tuple[Tuple[float, float], ...]] = None
    name: str = "metric"

    def __post_init__(self):
        n = len(self.entries)
        if n < 1 or any(len(row) != n for row in self.entries):
            raise DimensionError("Metric entries must form a square array")
        for i in range(n):
            for j in range(n):
                if self.entries[i][j].dim != n:
                    raise DimensionError(f"Entry ({i + 1},{j + 1}) lives on dimension {self.entries[i][j].dim}, chart has {n}")
                if self.entries[i][j].node != self.entries[j][i].node:
                    raise DimensionError(f"Metric entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ")
        for c in self.constraints:
            if c.dim != n:
                raise DimensionError("Domain constraint lives on a different chart dimension")
        box = self.box if self.box is not None else tuple((-1.0, 1.0) for _ in range(n))
        if len(box) != n or any(lo >= hi for lo, hi in box):
            raise DimensionError(f"Sampling box {box} does not fit dimension {n}")
        object.__setattr__(self, "box", tuple((float(lo), float(hi)) for lo, hi in box))

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[ExprLike]],
        constraints: Sequence[ExprLike] = (),
        box: Optional[Sequence[Sequence[float]]] = None,
        name: str = "metric",
    ) -> "MetricField":
        n = len(rows)
        parsed = [[as_expr(v, n) for v in row] for row in rows]
        # Share one tree between (i,j) and (j,i) when they agree structurally.
        for i in range(n):
            for j in range(i + 1, n):
                if parsed[j][i].node == parsed[i][j].node:
                    parsed[j][i] = parsed[i][j]
        return cls(
            tuple(tuple(row) for row in parsed),
            tuple(as_expr(c, n) for c in constraints),
            None if box is None else tuple(tuple(b) for b in box),
            name,
        )

    @classmethod
    def diagonal(cls, diag: Sequence[ExprLike], **kwargs) -> "MetricField":
        n = len(diag)
        zero = ScalarExpr.constant(0.0, n)
        rows = [[as_expr(diag[i], n) if i == j else zero for j in range(n)] for i in range(n)]
        return cls.from_rows(rows, **kwargs)

    @classmethod
    def conformally_flat(cls, factor: ExprLike, dim: int, **kwargs) -> "MetricField":
        """factor * delta_ij."""
        factor = as_expr(factor, dim)
        return cls.diagonal([factor] * dim, **kwargs)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def entry(self, i: int, j: int) -> ScalarExpr:
        return self.entries[i][j]

    def contains(self, point: Sequence[float]) -> bool:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dim,):
            return False
        if any(not (lo < x < hi) for x, (lo, hi) in zip(p, self.box)):
            return False
        try:
            return all(evaluate(c, p) > 0.0 for c in self.constraints)
        except JetDomainError:
            return False

    def values(self, point: Sequence[float]) -> np.ndarray:
        n = self.dim
        return np.array([[evaluate(self.entries[i][j], point) for j in range(n)] for i in range(n)])

    def at(self, point: Sequence[float]) -> MetricAtPoint:
        """Float-only metric with SPD validation."""
        if not self.contains(point):
            raise ChartDomainError(point, f"outside the domain of '{self.name}'")
        return MetricAtPoint.from_matrix(self.values(point), point)

    def jet(self, point: Sequence[float]) -> "MetricJet":
        return metric_jet(self, point)

    def with_entries(self, entries: Sequence[Sequence[ScalarExpr]], name: Optional[str] = None) -> "MetricField":
        return MetricField(tuple(tuple(r) for r in entries), self.constraints, self.box, name or self.name)


@dataclass(frozen=True, eq=False)
class MetricJet:
    point: np.ndarray
    g: TensorJet
    g_inv: TensorJet
    metric: MetricAtPoint

    @property
    def dim(self) -> int:
        return self.g.dim

    @property
    def dg(self) -> np.ndarray:
        return self.g.parts[1]

    @property
    def d2g(self) -> np.ndarray:
        return self.g.parts[2]

    @property
    def d3g(self) -> np.ndarray:
        return self.g.parts[3]

    @cached_property
    def curvature(self) -> "CurvatureJets":
        return CurvatureJets(self)

    def scalar_jet(self, f: ExprLike) -> TensorJet:
        return TensorJet.scalar(JetEvaluator(self.point, self.dim)(as_expr(f, self.dim)))


def metric_jet(M: MetricField, point: Sequence[float]) -> MetricJet:
    p = np.asarray(point, dtype=float)
    if not M.contains(p):
        raise ChartDomainError(p, f"outside the domain of '{M.name}'")
    evaluator = JetEvaluator(p, M.dim)
    n = M.dim
    jets = [evaluator(M.entries[i][j]) for i in range(n) for j in range(n)]
    g = TensorJet.from_scalar_jets(jets, (n, n), n)
    metric = MetricAtPoint.from_matrix(g.value, p)
    logger.debug("metric jet at %s for '%s'", tuple(p), M.name)
    return MetricJet(p, g, g.inverse(), metric)


# ---------------------------------------------------------------------------
# Covariant derivative
# ---------------------------------------------------------------------------

def cov_derivative(t: TensorJet, variances: Sequence[Variance], gamma: TensorJet) -> TensorJet:
    """
    nabla_z T with z appended as the last slot. The result jet order is
    min(t.order - 1, gamma.order).
    """
    if t.order < 1:
        raise MissingDerivativeError("Covariant derivative needs first derivative data of the field")
    rank = len(variances)
    if len(t.shape) != rank:
        raise DimensionError(f"Tensor of rank {len(t.shape)} given {rank} variances")
    order = min(t.order - 1, gamma.order)
    out = t.derivative().truncate(order)
    gam = gamma.truncate(order)
    letters = _SLOT_LETTERS[:rank]
    for slot, variance in enumerate(variances):
        a = letters[slot]
        swapped = letters[:slot] + "y" + letters[slot + 1:]
        if Variance(variance) is COV:
            out = out - TensorJet.einsum(f"{swapped},yz{a}->{letters}z", t, gam)
        else:
            out = out + TensorJet.einsum(f"{swapped},{a}zy->{letters}z", t, gam)
    return out


def _kulkarni_nomizu(h: TensorJet, k: TensorJet) -> TensorJet:
    """h_ac k_bd - h_ad k_bc + h_bd k_ac - h_bc k_ad."""
    return (TensorJet.einsum("ac,bd->abcd", h, k)
            - TensorJet.einsum("ad,bc->abcd", h, k)
            + TensorJet.einsum("bd,ac->abcd", h, k)
            - TensorJet.einsum("bc,ad->abcd", h, k))


def _times_scalar(s: TensorJet, t: TensorJet, spec: str) -> TensorJet:
    return TensorJet.einsum(f",{spec}->{spec}", s, t)


class CurvatureJets:
    """Lazily computed curvature of one MetricJet. Jet-valued fields carry one derivative order."""

    def __init__(self, jet: MetricJet):
        self.jet = jet
        self.n = jet.dim

    @cached_property
    def gamma(self) -> TensorJet:
        g_inv = self.jet.g_inv.truncate(2)
        dg = self.jet.g.derivative()
        lowered = (dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)) * 0.5
        return TensorJet.einsum("cd,dab->cab", g_inv, lowered)

    @cached_property
    def riemann_up(self) -> TensorJet:
        """[d, a, b, c] = R^d_abc."""
        d_gamma = self.gamma.derivative()
        gamma = self.gamma.truncate(1)
        return (d_gamma.transpose(0, 1, 3, 2)
                - d_gamma.transpose(0, 3, 1, 2)
                + TensorJet.einsum("eac,dbe->dabc", gamma, gamma)
                - TensorJet.einsum("ebc,dae->dabc", gamma, gamma))

    @cached_property
    def riemann(self) -> TensorJet:
        return TensorJet.einsum("de,eabc->abcd", self.jet.g.truncate(1), self.riemann_up)

    @cached_property
    def ricci(self) -> TensorJet:
        return TensorJet.einsum("bd,abcd->ac", self.jet.g_inv.truncate(1), self.riemann)

    @cached_property
    def scalar(self) -> TensorJet:
        return TensorJet.einsum("ac,ac->", self.jet.g_inv.truncate(1), self.ricci)

    @cached_property
    def schouten(self) -> TensorJet:
        n = self.n
        if n < 3:
            raise DimensionError("The Schouten tensor needs dimension >= 3")
        g = self.jet.g.truncate(1)
        trace_part = _times_scalar(self.scalar, g, "ab") * (1.0 / (2.0 * (n - 1)))
        return (self.ricci - trace_part) * (1.0 / (n - 2))

    @cached_property
    def weyl(self) -> TensorJet:
        n = self.n
        if n < 3:
            raise DimensionError("The Weyl tensor needs dimension >= 3")
        g = self.jet.g.truncate(1)
        gg = _kulkarni_nomizu(g, g) * 0.5
        return (self.riemann
                + _times_scalar(self.scalar, gg, "abcd") * (1.0 / ((n - 1) * (n - 2)))
                - _kulkarni_nomizu(self.ricci, g) * (1.0 / (n - 2)))

    # Order-0 covariant derivatives

    @cached_property
    def nabla_ricci(self) -> np.ndarray:
        return cov_derivative(self.ricci, (COV, COV), self.gamma).value

    @cached_property
    def nabla_scalar(self) -> np.ndarray:
        return self.scalar.parts[1]

    @cached_property
    def nabla_schouten(self) -> np.ndarray:
        return cov_derivative(self.schouten, (COV, COV), self.gamma).value

    @cached_property
    def nabla_weyl(self) -> np.ndarray:
        return cov_derivative(self.weyl, (COV,) * 4, self.gamma).value

    @cached_property
    def cotton(self) -> np.ndarray:
        n = self.n
        nr = self.nabla_ricci
        g = self.jet.metric.g
        dr = self.nabla_scalar
        trace_part = np.einsum("ab,c->abc", g, dr) - np.einsum("ac,b->abc", g, dr)
        return nr - nr.transpose(0, 2, 1) - trace_part / (2.0 * (n - 1))

    @cached_property
    def schouten_curl(self) -> np.ndarray:
        """nabla_c S_ab - nabla_b S_ac."""
        ns = self.nabla_schouten
        return ns - ns.transpose(0, 2, 1)

    @cached_property
    def div_weyl(self) -> np.ndarray:
        if self.n < 4:
            raise DimensionError("Divergence of Weyl is only meaningful for dimension >= 4")
        return np.einsum("de,abcde->abc", self.jet.metric.g_inv, self.nabla_weyl)


# ---------------------------------------------------------------------------
# Public operations returning TensorValues
# ---------------------------------------------------------------------------

Source = Union[MetricJet, CurvatureJets]


def _engine(source: Source) -> CurvatureJets:
    return source if isinstance(source, CurvatureJets) else source.curvature


def _cov(arr: np.ndarray, n: int) -> TensorValue:
    return TensorValue(arr, (COV,) * np.ndim(arr), n)


def christoffel(source: Source) -> TensorValue:
    c = _engine(source)
    return TensorValue(c.gamma.value, (CON, COV, COV), c.n)


def riemann(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.riemann.value, c.n)


def riemann_up(source: Source) -> TensorValue:
    c = _engine(source)
    return TensorValue(c.riemann_up.value, (CON, COV, COV, COV), c.n)


def ricci(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.ricci.value, c.n)


def scalar(source: Source) -> float:
    return float(_engine(source).scalar.value)


def schouten(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.schouten.value, c.n)


def weyl(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.weyl.value, c.n)


def cotton(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.cotton, c.n)


def div_weyl(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.div_weyl, c.n)


def nabla_ricci(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.nabla_ricci, c.n)


def nabla_scalar(source: Source) -> TensorValue:
    c = _engine(source)
    return _cov(c.nabla_scalar, c.n)


def sectional_curvature(source: Source, v: Sequence[float], w: Sequence[float]) -> float:
    c = _engine(source)
    g = c.jet.metric.g
    v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    area = (v @ g @ v) * (w @ g @ w) - (v @ g @ w) ** 2
    if area <= 0.0:
        raise DimensionError("Sectional curvature needs two independent vectors")
    return float(np.einsum("abcd,a,b,c,d->", c.riemann.value, v, w, v, w) / area)


def metric_compatibility(jet: MetricJet) -> TensorValue:
    """nabla g, which must vanish."""
    gamma = jet.curvature.gamma
    return _cov(cov_derivative(jet.g.truncate(1), (COV, COV), gamma).value, jet.dim)


def contracted_bianchi_residual(source: Source) -> TensorValue:
    """nabla^b R_ab - 1/2 nabla_a R."""
    c = _engine(source)
    div_ric = np.einsum("bc,abc->a", c.jet.metric.g_inv, c.nabla_ricci)
    return _cov(div_ric - 0.5 * c.nabla_scalar, c.n)


# ---------------------------------------------------------------------------
# Scalar fields
# ---------------------------------------------------------------------------

class ScalarFieldJets:
    """Gradient, Hessian and third covariant derivative of a scalar field at one point."""

    def __init__(self, f: ExprLike, jet: MetricJet):
        self.jet = jet
        self.f = jet.scalar_jet(f)

    @property
    def value(self) -> float:
        return float(self.f.value)

    @cached_property
    def df(self) -> TensorJet:
        return self.f.derivative()

    @cached_property
    def hessian(self) -> TensorJet:
        return cov_derivative(self.df, (COV,), self.jet.curvature.gamma)

    @cached_property
    def third(self) -> np.ndarray:
        return cov_derivative(self.hessian, (COV, COV), self.jet.curvature.gamma).value

    @cached_property
    def gradient_up(self) -> np.ndarray:
        return self.jet.metric.g_inv @ self.df.value

    @property
    def laplacian(self) -> float:
        return float(np.einsum("ab,ab->", self.jet.metric.g_inv, self.hessian.value))

    @property
    def grad_norm_sq(self) -> float:
        return float(self.df.value @ self.gradient_up)


def gradient(f: ExprLike, jet: MetricJet) -> TensorValue:
    return _cov(ScalarFieldJets(f, jet).df.value, jet.dim)


def hessian(f: ExprLike, jet: MetricJet) -> TensorValue:
    return _cov(ScalarFieldJets(f, jet).hessian.value, jet.dim)


def laplacian(f: ExprLike, jet: MetricJet) -> float:
    return ScalarFieldJets(f, jet).laplacian


def grad_norm_sq(f: ExprLike, jet: MetricJet) -> float:
    return ScalarFieldJets(f, jet).grad_norm_sq


def third_covariant_derivative(f: ExprLike, jet: MetricJet) -> TensorValue:
    return _cov(ScalarFieldJets(f, jet).third, jet.dim)


def ricci_commutator_residual(f: ExprLike, jet: MetricJet) -> Tuple[TensorValue, TensorValue]:
    """
    (nabla_c nabla_b nabla_a u - nabla_b nabla_c nabla_a u) - R_cbad nabla^d u,
    returned with the commutator itself as the scale operand.
    """
    field_jets = ScalarFieldJets(f, jet)
    third = field_jets.third
    commutator = third - third.transpose(0, 2, 1)
    curvature_term = np.einsum("cbad,d->abc", jet.curvature.riemann.value, field_jets.gradient_up)
    return _cov(commutator - curvature_term, jet.dim), _cov(commutator, jet.dim)


# ---------------------------------------------------------------------------
# Snapshot
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CurvaturePack:
    point: Tuple[float, ...]
    metric: TensorValue
    christoffel: TensorValue
    riemann: TensorValue
    ricci: TensorValue
    scalar: float
    nabla_ricci: TensorValue
    nabla_scalar: TensorValue
    cotton: TensorValue
    schouten: Optional[TensorValue] = None
    nabla_schouten: Optional[TensorValue] = None
    weyl: Optional[TensorValue] = None
    div_weyl: Optional[TensorValue] = None


def curvature_pack(jet: MetricJet) -> CurvaturePack:
    c = jet.curvature
    n = jet.dim
    return CurvaturePack(
        point=tuple(float(x) for x in jet.point),
        metric=jet.metric.tensor,
        christoffel=christoffel(c),
        riemann=riemann(c),
        ricci=ricci(c),
        scalar=scalar(c),
        nabla_ricci=nabla_ricci(c),
        nabla_scalar=nabla_scalar(c),
        cotton=cotton(c),
        schouten=schouten(c) if n >= 3 else None,
        nabla_schouten=_cov(c.nabla_schouten, n) if n >= 3 else None,
        weyl=weyl(c) if n >= 3 else None,
        div_weyl=div_weyl(c) if n >= 4 else None,
    )


# ---------------------------------------------------------------------------
# Identity residuals
# ---------------------------------------------------------------------------

def worst(*residuals: Residual) -> Residual:
    return max(residuals, key=lambda r: r.value)


def riemann_symmetry_residual(source: Source) -> Residual:
    """Worst of R_abcd + R_bacd, R_abcd + R_abdc and R_abcd - R_cdab."""
    c = _engine(source)
    R = riemann(c)
    m = c.jet.metric
    return worst(
        Residual(R + R.transpose(1, 0, 2, 3), (R,), m),
        Residual(R + R.transpose(0, 1, 3, 2), (R,), m),
        Residual(R - R.transpose(2, 3, 0, 1), (R,), m),
    )


def first_bianchi_residual(source: Source) -> Residual:
    """R_abcd + R_bcad + R_cabd."""
    c = _engine(source)
    R = riemann(c)
    return Residual(R + R.transpose(2, 0, 1, 3) + R.transpose(1, 2, 0, 3), (R,), c.jet.metric)


def weyl_trace_residual(source: Source) -> Residual:
    """Worst trace of W over any pair of slots."""
    c = _engine(source)
    W = weyl(c)
    m = c.jet.metric
    traces = [Residual(contract(W, i, j, m), (W,), m) for i in range(4) for j in range(i + 1, 4)]
    return worst(*traces)


def cotton_symmetry_residual(source: Source) -> Residual:
    """Worst of C_abc + C_acb and the traces of C."""
    c = _engine(source)
    C = cotton(c)
    m = c.jet.metric
    return worst(
        Residual(C + C.transpose(0, 2, 1), (C,), m),
        Residual(contract(C, 0, 1, m), (C,), m),
        Residual(contract(C, 0, 2, m), (C,), m),
    )


def divergence_identity_residual(source: Source) -> Residual:
    """nabla^d W_abcd + (n-3)/(n-2) C_cba."""
    c = _engine(source)
    n = c.n
    D = div_weyl(c)
    C = cotton(c)
    k = (n - 3.0) / (n - 2.0)
    return Residual(D + C.transpose(2, 1, 0) * k, (D, C * k), c.jet.metric)


def cotton_schouten_residual(source: Source) -> Residual:
    """C_abc - (n-2)(nabla_c S_ab - nabla_b S_ac)."""
    c = _engine(source)
    C = cotton(c)
    curl = _cov(c.schouten_curl * (c.n - 2.0), c.n)
    return Residual(C - curl, (C, curl), c.jet.metric)


def contracted_bianchi(source: Source) -> Residual:
    c = _engine(source)
    return Residual(contracted_bianchi_residual(c), (nabla_scalar(c),), c.jet.metric)


def metric_compatibility_residual(jet: MetricJet) -> Residual:
    return Residual(metric_compatibility(jet), (jet.metric.tensor,), jet.metric)


def constant_curvature_residual(source: Source, kappa: float) -> Residual:
    """R_abcd - kappa (g_ac g_bd - g_ad g_bc)."""
    c = _engine(source)
    g = c.jet.metric.g
    model = _cov(kappa * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)), c.n)
    R = riemann(c)
    return Residual(R - model, (R, model), c.jet.metric)


def einstein_residual(source: Source) -> Residual:
    """Ric - (R/n) g."""
    c = _engine(source)
    Ric = ricci(c)
    trace_part = c.jet.metric.tensor * (scalar(c) / c.n)
    return Residual(Ric - trace_part, (Ric,), c.jet.metric)


def ricci_commutator(f: ExprLike, jet: MetricJet) -> Residual:
    residual, commutator = ricci_commutator_residual(f, jet)
    return Residual(residual, (commutator,), jet.metric)
