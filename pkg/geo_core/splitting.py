# geo_core/splitting.py
"""
Local splitting of a GQE metric whose conformal rescaling has a Codazzi Schouten tensor.

Adapted charts put the distinguished direction on x1 and the leaves {x1 = const} on
x2..xn, with g_1i = 0 for i >= 2 as literal zero expressions. Leaf indices below are
0-based chart indices 1..n-1.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .config import settings
from .conformal import conformal_metric, cotton_conformal_gqe_residual
from .curvature import (
    ExprLike,
    MetricField,
    MetricJet,
    ScalarFieldJets,
    constant_curvature_residual,
    cotton,
    metric_jet,
    ricci,
    riemann,
    scalar,
    weyl,
)
from .errors import DimensionError, GeometryError, NotAdaptedChartError, WarpSplitError
from .expr import ScalarExpr, as_expr, max_var_index, substitute
from .gqe import radial_weyl
from .jets import TensorJet
from .tensor import COV, MetricAtPoint, Residual, TensorValue, norm

logger = logging.getLogger(__name__)


def _cov(arr: np.ndarray, n: int) -> TensorValue:
    return TensorValue(arr, (COV,) * np.ndim(arr), n)


# ---------------------------------------------------------------------------
# Eigenstructure of the conformal Ricci tensor
# ---------------------------------------------------------------------------

@dataclass
class EigenSplit:
    eigenvalues: Tuple[float, ...]
    clusters: List[Tuple[float, int]]
    radial_alignment: Optional[float] = None

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return tuple(sorted(m for _, m in self.clusters))


def cluster_eigenvalues(values: Sequence[float], gap: Optional[float] = None) -> List[Tuple[float, int]]:
    """Group sorted eigenvalues whose neighbour distance is below gap * max(1, max |value|)."""
    gap = settings.CLUSTER_GAP if gap is None else gap
    values = np.sort(np.asarray(values, dtype=float))
    scale = max(1.0, float(np.max(np.abs(values))))
    groups: List[List[float]] = [[values[0]]]
    for prev, cur in zip(values[:-1], values[1:]):
        if cur - prev > gap * scale:
            groups.append([cur])
        else:
            groups[-1].append(cur)
    return [(float(np.mean(g)), len(g)) for g in groups]


def eigen_split(symmetric: np.ndarray, metric: MetricAtPoint, covector: Optional[np.ndarray] = None,
                gap: Optional[float] = None) -> EigenSplit:
    """Generalized eigenproblem T v = sigma g v; alignment of `covector` with the simple eigenvector."""
    w, v = linalg.eigh(symmetric, metric.g)
    clusters = cluster_eigenvalues(w, gap)
    alignment = None
    if covector is not None:
        cov_norm = float(np.sqrt(max(covector @ metric.g_inv @ covector, 0.0)))
        simple = [value for value, mult in clusters if mult == 1]
        if cov_norm > settings.REGULAR_POINT_THRESHOLD and simple:
            best = 0.0
            for value in simple:
                k = int(np.argmin(np.abs(w - value)))
                vec = v[:, k]
                vec_norm = float(np.sqrt(vec @ metric.g @ vec))
                best = max(best, abs(float(covector @ vec)) / (vec_norm * cov_norm))
            alignment = best
    return EigenSplit(tuple(float(x) for x in w), clusters, alignment)


def ricci_eigenstructure(M: MetricField, f: ExprLike, point: Sequence[float],
                         rescaled: Optional[MetricField] = None) -> EigenSplit:
    """Eigenvalues of Ric~ relative to g~ for g~ = exp(-2f/(n-2)) g."""
    n = M.dim
    f = as_expr(f, n)
    rescaled = rescaled or conformal_metric(M, f * (1.0 / (n - 2.0)))
    tilde = metric_jet(rescaled, point)
    df = tilde.scalar_jet(f).derivative().value
    return eigen_split(ricci(tilde).components, tilde.metric, df)


def codazzi_residual(M: MetricField, point: Sequence[float]) -> Residual:
    """nabla_c S_ab - nabla_b S_ac, scaled by the Schouten derivative."""
    jet = metric_jet(M, point)
    curl = _cov(jet.curvature.schouten_curl, jet.dim)
    return Residual(curl, (_cov(jet.curvature.nabla_schouten, jet.dim),), jet.metric)


def codazzi_cotton_consistency(M: MetricField, point: Sequence[float]) -> Residual:
    """(n-2) (nabla_c S_ab - nabla_b S_ac) - C_abc."""
    jet = metric_jet(M, point)
    n = jet.dim
    curl = _cov(jet.curvature.schouten_curl * (n - 2.0), n)
    C = cotton(jet)
    return Residual(curl - C, (curl, C), jet.metric)


# ---------------------------------------------------------------------------
# Adapted charts and leaf geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdaptedChartMetric:
    metric: MetricField

    def __post_init__(self):
        M = self.metric
        if M.dim < 2:
            raise NotAdaptedChartError("An adapted chart needs dimension >= 2")
        offending = [i + 1 for i in range(1, M.dim) if not M.entries[0][i].is_zero]
        if offending:
            raise NotAdaptedChartError(
                f"Metric '{M.name}' is not adapted: g_1i is not the literal zero for i in {offending}"
            )

    @property
    def dim(self) -> int:
        return self.metric.dim

    @classmethod
    def is_adapted(cls, M: MetricField) -> bool:
        return M.dim >= 2 and all(M.entries[0][i].is_zero for i in range(1, M.dim))


def _adapted(A) -> AdaptedChartMetric:
    return A if isinstance(A, AdaptedChartMetric) else AdaptedChartMetric(A)


class LeafGeometry:
    """Second fundamental form of the leaf through a point and its derivatives."""

    def __init__(self, jet: MetricJet):
        self.jet = jet
        n = jet.dim
        self.n = n
        gamma = jet.curvature.gamma
        g11 = jet.g.truncate(2)[0, 0]
        # h_ij = -G^1_ij g_11 on the leaf block, as a jet of order 2
        self.h_jet = -TensorJet.einsum(",ij->ij", g11, gamma[0][1:, 1:])
        self.g_leaf = jet.metric.g[1:, 1:]
        self.g_leaf_inv = np.linalg.inv(self.g_leaf)
        self.leaf_metric = MetricAtPoint(self.g_leaf, self.g_leaf_inv)
        self.leaf_gamma = gamma.value[1:, 1:, 1:]

    @property
    def h(self) -> np.ndarray:
        return self.h_jet.value

    @property
    def mean_curvature(self) -> float:
        return float(np.einsum("ij,ij->", self.g_leaf_inv, self.h))

    def mean_curvature_jet(self) -> TensorJet:
        return TensorJet.einsum("ij,ij->", self.jet.g_inv.truncate(2)[1:, 1:], self.h_jet)

    def umbilicity(self) -> Residual:
        m = self.n - 1
        h = _cov(self.h, m)
        model = _cov(self.g_leaf * (self.mean_curvature / m), m)
        return Residual(h - model, (h,), self.leaf_metric)

    def codazzi_mainardi(self) -> np.ndarray:
        """[i, j, k] = (nabla_i h)(j,k) - (nabla_j h)(i,k) - R_{ijk1}, leaf indices."""
        h = self.h
        dh = self.h_jet.parts[1][:, :, 1:]
        lg = self.leaf_gamma
        nab = dh - np.einsum("mij,mk->jki", lg, h) - np.einsum("mik,jm->jki", lg, h)
        N = nab.transpose(2, 0, 1)
        riemann = self.jet.curvature.riemann.value
        return N - N.transpose(1, 0, 2) - riemann[1:, 1:, 1:, 0]


def second_fundamental_form(A, point: Sequence[float]) -> Tuple[np.ndarray, float]:
    A = _adapted(A)
    leaf = LeafGeometry(metric_jet(A.metric, point))
    return leaf.h, leaf.mean_curvature


def umbilicity_residual(A, point: Sequence[float]) -> Residual:
    A = _adapted(A)
    return LeafGeometry(metric_jet(A.metric, point)).umbilicity()


def codazzi_mainardi_all(A, point: Sequence[float]) -> np.ndarray:
    A = _adapted(A)
    return LeafGeometry(metric_jet(A.metric, point)).codazzi_mainardi()


def codazzi_mainardi_residual(A, point: Sequence[float], i: int, j: int, k: int) -> float:
    """Leaf indices i, j, k are 1-based chart indices in 2..n."""
    A = _adapted(A)
    n = A.dim
    for idx in (i, j, k):
        if not 2 <= idx <= n:
            raise NotAdaptedChartError(f"Leaf index {idx} outside 2..{n}")
    return float(codazzi_mainardi_all(A, point)[i - 2, j - 2, k - 2])


@dataclass
class LeafDiagnostics:
    points: int = 0
    max_leaf_dH: float = 0.0
    max_mean_curvature_residual: float = 0.0
    max_traced_codazzi: float = 0.0
    max_geodesic: float = 0.0
    max_umbilicity: float = 0.0
    max_codazzi_mainardi: float = 0.0
    inconclusive: List[Tuple[float, ...]] = field(default_factory=list)


def _schouten_eigenvalue_jets(jet: MetricJet) -> Tuple[TensorJet, TensorJet]:
    """sigma1 = (g^-1 S)^1_1 and sigma2 = (tr - sigma1)/(n-1), as order-1 jets."""
    n = jet.dim
    mixed = TensorJet.einsum("ac,cb->ab", jet.g_inv.truncate(1), jet.curvature.schouten)
    sigma1 = mixed[0, 0]
    trace = TensorJet([np.einsum("aa...->...", p) for p in mixed.parts], n)
    return sigma1, (trace - sigma1) * (1.0 / (n - 1))


def leaf_mean_curvature_diagnostics(A, samples: Sequence[Sequence[float]], gap: Optional[float] = None) -> LeafDiagnostics:
    A = _adapted(A)
    gap = settings.CLUSTER_GAP if gap is None else gap
    n = A.dim
    out = LeafDiagnostics()
    for p in samples:
        jet = metric_jet(A.metric, p)
        leaf = LeafGeometry(jet)
        H_jet = leaf.mean_curvature_jet()
        H = float(H_jet.value)
        dH = H_jet.parts[1][1:]
        out.points += 1
        out.max_leaf_dH = max(out.max_leaf_dH, float(np.max(np.abs(dH))))
        out.max_geodesic = max(out.max_geodesic, float(np.max(np.abs(jet.dg[0, 0, 1:]))))
        out.max_umbilicity = max(out.max_umbilicity, leaf.umbilicity().value)
        out.max_codazzi_mainardi = max(out.max_codazzi_mainardi, float(np.max(np.abs(leaf.codazzi_mainardi()))))
        traced = (2.0 - n) / (n - 1.0) * dH - ricci(jet).components[1:, 0]
        out.max_traced_codazzi = max(out.max_traced_codazzi, float(np.max(np.abs(traced))))

        sigma1, sigma2 = _schouten_eigenvalue_jets(jet)
        s1, s2 = float(sigma1.value), float(sigma2.value)
        if abs(s1 - s2) <= gap * max(1.0, abs(s1), abs(s2)):
            out.inconclusive.append(tuple(float(x) for x in p))
            logger.warning("Schouten eigenvalues collide at %s, mean-curvature check inconclusive", tuple(p))
            continue
        predicted = float(sigma2.parts[1][0]) / (s1 - s2)
        residual = abs(H / (n - 1) - predicted) / (1.0 + abs(predicted))
        out.max_mean_curvature_residual = max(out.max_mean_curvature_residual, residual)
    return out


# ---------------------------------------------------------------------------
# Warp extraction and fibers
# ---------------------------------------------------------------------------

@dataclass
class WarpSplit:
    grid: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    fiber: MetricField
    spread: float
    residual: float


def _phi_with_derivatives(jet: MetricJet) -> Tuple[np.ndarray, Tuple[float, float, float]]:
    """Ratios d_1 g_ij / g_ij over leaf entries, and (phi, phi', phi'') from the largest entry."""
    g = jet.g.parts[0][1:, 1:]
    d1 = jet.g.parts[1][1:, 1:, 0]
    mask = np.abs(g) > 1e-12 * np.max(np.abs(g))
    ratios = d1[mask] / g[mask]
    i, j = np.unravel_index(int(np.argmax(np.abs(g))), g.shape)
    a = g[i, j]
    a1 = d1[i, j]
    a2 = jet.g.parts[2][1 + i, 1 + j, 0, 0]
    a3 = jet.g.parts[3][1 + i, 1 + j, 0, 0, 0]
    phi = a1 / a
    dphi = a2 / a - (a1 / a) ** 2
    ddphi = a3 / a - 3.0 * a2 * a1 / a ** 2 + 2.0 * (a1 / a) ** 3
    return ratios, (float(phi), float(dphi), float(ddphi))


def fiber_metric(A, x1_0: float) -> MetricField:
    """Leaf block at x1 = x1_0, re-indexed onto a chart x1..x_{n-1}."""
    A = _adapted(A)
    M = A.metric
    n = M.dim
    m = n - 1
    mapping = {1: ScalarExpr.constant(x1_0, m)}
    mapping.update({k: ScalarExpr.variable(k - 1, m) for k in range(2, n + 1)})
    rows = [[substitute(M.entries[i][j], mapping, m) for j in range(1, n)] for i in range(1, n)]
    constraints = [substitute(c, mapping, m) for c in M.constraints]
    return MetricField.from_rows(rows, constraints, M.box[1:], name=f"fiber of {M.name}")


def warp_split(A, grid: Sequence[float], leaf_points: Sequence[Sequence[float]],
               spread_tol: Optional[float] = None) -> WarpSplit:
    """
    Estimate phi = d_1 g_ij / g_ij along the x1 grid, integrate psi with psi(grid[0]) = 0 and
    rebuild g_ij = exp(psi) G_ij on every grid leaf.
    """
    A = _adapted(A)
    spread_tol = settings.TOL_WARP_SPREAD if spread_tol is None else spread_tol
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.shape[0] < 2 or np.any(np.diff(grid) <= 0):
        raise WarpSplitError("The x1 grid must be strictly increasing with at least two nodes")
    if len(leaf_points) == 0:
        raise WarpSplitError("warp_split needs at least one leaf point")

    phis = np.zeros((grid.shape[0], 3))
    spread = 0.0
    for k, x1 in enumerate(grid):
        per_leaf = []
        for y in leaf_points:
            ratios, derivs = _phi_with_derivatives(metric_jet(A.metric, np.concatenate(([x1], y))))
            per_leaf.append((ratios, derivs))
        phis[k] = per_leaf[0][1]
        phi = phis[k, 0]
        for ratios, _ in per_leaf:
            spread = max(spread, float(np.max(np.abs(ratios - phi))) / (1.0 + abs(phi)))
    if spread > spread_tol:
        raise WarpSplitError(f"d_1 g_ij / g_ij depends on (i, j) or the leaf point (spread {spread!r}); not a warped product")

    # Two-point Hermite rule, exact for quintics.
    psi = np.zeros(grid.shape[0])
    for k in range(grid.shape[0] - 1):
        h = grid[k + 1] - grid[k]
        (fa, dfa, ddfa), (fb, dfb, ddfb) = phis[k], phis[k + 1]
        psi[k + 1] = psi[k] + h / 2.0 * (fa + fb) + h ** 2 / 10.0 * (dfa - dfb) + h ** 3 / 120.0 * (ddfa + ddfb)

    fiber = fiber_metric(A, float(grid[0]))
    residual = 0.0
    for y in leaf_points:
        G = fiber.values(y)
        for x1, s in zip(grid, psi):
            g_leaf = A.metric.values(np.concatenate(([x1], y)))[1:, 1:]
            diff = float(np.max(np.abs(g_leaf - np.exp(s) * G)))
            residual = max(residual, diff / (1.0 + float(np.max(np.abs(g_leaf)))))
    logger.debug("warp split over %d grid nodes: spread %r, residual %r", grid.shape[0], spread, residual)
    return WarpSplit(grid, phis[:, 0].copy(), psi, fiber, spread, residual)


@dataclass
class FiberCheck:
    dim: int
    max_traceless_ricci: float = 0.0
    einstein_constants: List[float] = field(default_factory=list)
    spread: float = 0.0
    constant_curvature: Optional[float] = None
    trivially_satisfied: bool = False

    def einstein(self, tol: float) -> bool:
        return self.trivially_satisfied or (self.max_traceless_ricci <= tol and self.spread <= tol)


def fiber_einstein_check(fiber: MetricField, leaf_points: Sequence[Sequence[float]]) -> FiberCheck:
    m = fiber.dim
    out = FiberCheck(dim=m)
    if m < 2:
        out.trivially_satisfied = True
        return out
    if len(leaf_points) == 0:
        raise WarpSplitError("The fiber check needs at least one point of the fiber domain")
    for y in leaf_points:
        jet = metric_jet(fiber, y)
        Ric = ricci(jet)
        R = scalar(jet)
        traceless = Ric - jet.metric.tensor * (R / m)
        out.max_traceless_ricci = max(out.max_traceless_ricci, norm(traceless, jet.metric) / (1.0 + norm(Ric, jet.metric)))
        out.einstein_constants.append(R / m)
        if m == 3:
            kappa = R / (m * (m - 1))
            residual = constant_curvature_residual(jet, kappa).value
            out.constant_curvature = max(out.constant_curvature or 0.0, residual)
    consts = np.array(out.einstein_constants)
    out.spread = float(consts.max() - consts.min()) / (1.0 + float(np.max(np.abs(consts))))
    return out


# ---------------------------------------------------------------------------
# End-to-end
# ---------------------------------------------------------------------------

@dataclass
class PipelineStep:
    name: str
    value: Optional[float]
    tolerance: Optional[float]
    status: str  # pass | fail | skipped | info
    detail: str = ""


@dataclass
class PipelineResult:
    verdict: str  # conclusion-verified | hypothesis-failed | conclusion-failed
    steps: List[PipelineStep] = field(default_factory=list)
    failed_hypothesis: Optional[str] = None

    def step(self, name: str) -> PipelineStep:
        return next(s for s in self.steps if s.name == name)


def _leaf_points(points: np.ndarray, limit: int = 5) -> np.ndarray:
    return points[:limit, 1:]


def theorem_pipeline(M: MetricField, f: ExprLike, points: Sequence[Sequence[float]],
                     tolerances: Optional[Dict[str, float]] = None) -> PipelineResult:
    """
    Chain the proof: hypotheses (harmonic Weyl, radial Weyl), conformal Codazzi property,
    Ricci eigenstructure, leaf geometry, warp extraction and the Einstein fiber.
    """
    tol = settings.tolerance_defaults()
    tol.update(tolerances or {})
    n = M.dim
    if n < 3:
        raise DimensionError("The splitting pipeline needs dimension >= 3")
    f = as_expr(f, n)
    points = np.asarray(points, dtype=float)
    result = PipelineResult(verdict="conclusion-verified")

    def record(name, value, limit, detail=""):
        status = "pass" if value <= limit else "fail"
        result.steps.append(PipelineStep(name, float(value), limit, status, detail))
        return status == "pass"

    jets = [metric_jet(M, p) for p in points]
    harmonic = max(Residual(cotton(j), (_cov(j.curvature.nabla_ricci, n),), j.metric).value for j in jets)
    radial = max(radial_weyl(j, f)[1] for j in jets)
    ok_harmonic = record("harmonic_weyl", harmonic, tol["harmonic_weyl"])
    ok_radial = record("radial_weyl", radial, tol["radial_weyl"])
    if not (ok_harmonic and ok_radial):
        result.verdict = "hypothesis-failed"
        result.failed_hypothesis = "harmonic_weyl" if not ok_harmonic else "radial_weyl"
        return result

    rescaled = conformal_metric(M, f * (1.0 / (n - 2.0)))
    record("conformal_cotton", max(cotton_conformal_gqe_residual(M, f, p).value for p in points), tol["cotton_law"])
    record("conformal_codazzi", max(codazzi_residual(rescaled, p).value for p in points), tol["cotton_law"])

    regular, mults, alignments = 0, set(), []
    for j, p in zip(jets, points):
        if np.sqrt(max(ScalarFieldJets(f, j).grad_norm_sq, 0.0)) <= settings.REGULAR_POINT_THRESHOLD:
            continue
        regular += 1
        split = ricci_eigenstructure(M, f, p, rescaled)
        mults.add(split.multiplicities)
        if split.radial_alignment is not None:
            alignments.append(split.radial_alignment)
    allowed = {(n,), (1, n - 1)}
    bad = [mm for mm in mults if mm not in allowed]
    if not regular:
        result.steps.append(PipelineStep("eigen_multiplicities", None, None, "skipped", "no regular points"))
    else:
        result.steps.append(PipelineStep(
            "eigen_multiplicities", float(len(bad)), 0.0, "fail" if bad else "pass",
            f"observed {sorted(mults)} at {regular} regular points",
        ))
    if alignments:
        record("radial_alignment", 1.0 - min(alignments), tol["radial_alignment"])

    # leaves must be the level sets of f as well as orthogonal to x1
    if not (AdaptedChartMetric.is_adapted(rescaled) and max_var_index(f.node) <= 1):
        for name in ("umbilicity", "codazzi_mainardi", "leaf_mean_curvature", "warp_split", "fiber_einstein"):
            result.steps.append(PipelineStep(name, None, None, "skipped", "chart is not adapted"))
    else:
        A = AdaptedChartMetric(rescaled)
        diag = leaf_mean_curvature_diagnostics(A, points)
        record("umbilicity", diag.max_umbilicity, tol["umbilicity"])
        record("codazzi_mainardi", diag.max_codazzi_mainardi, tol["codazzi_mainardi"])
        record("leaf_constant_H", diag.max_leaf_dH, tol["leaf_diagnostics"])
        record("traced_codazzi", diag.max_traced_codazzi, tol["leaf_diagnostics"])
        record("geodesic_lines", diag.max_geodesic, tol["leaf_diagnostics"])
        record("mean_curvature_formula", diag.max_mean_curvature_residual, tol["leaf_diagnostics"],
               f"{len(diag.inconclusive)} inconclusive points")
        x1 = points[:, 0]
        grid = np.linspace(float(x1.min()), float(x1.max()), settings.WARP_GRID_SIZE)
        leaves = [y for y in _leaf_points(points)
                  if all(rescaled.contains(np.concatenate(([t], y))) for t in grid)]
        try:
            split = warp_split(A, grid, leaves, tol["warp_spread"])
        except GeometryError as exc:
            result.steps.append(PipelineStep("warp_split", None, tol["warp_reconstruction"], "fail", str(exc)))
        else:
            record("warp_split", split.residual, tol["warp_reconstruction"], f"phi spread {split.spread!r}")
            fiber_points = [y for y in leaves if split.fiber.contains(y)]
            try:
                check = fiber_einstein_check(split.fiber, fiber_points)
            except GeometryError as exc:
                result.steps.append(PipelineStep("fiber_einstein", None, tol["fiber_einstein"], "fail", str(exc)))
            else:
                record("fiber_einstein", max(check.max_traceless_ricci, check.spread), tol["fiber_einstein"])
                if check.constant_curvature is not None:
                    record("fiber_constant_curvature", check.constant_curvature, tol["fiber_einstein"])

    if n == 4 and regular:
        # nontrivial in dimension four forces local conformal flatness
        W = max(Residual(weyl(j), (riemann(j),), j.metric).value for j in jets)
        record("conformally_flat", W, tol["identity"])

    if any(s.status == "fail" for s in result.steps):
        result.verdict = "conclusion-failed"
    return result
