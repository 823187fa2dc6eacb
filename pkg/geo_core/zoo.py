# geo_core/zoo.py
"""
Named metric/potential instances: constant-curvature spaces, products, warped products,
solitons and a random analytic family. Every instance can be resolved from a string key.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import settings
from .curvature import (
    ExprLike,
    MetricField,
    constant_curvature_residual,
    cotton,
    einstein_residual,
    metric_jet,
    nabla_ricci,
    riemann,
    scalar,
    weyl,
)
from .errors import ParameterRangeError, UnknownInstanceError
from .expr import ScalarExpr, as_expr, cos, diff, exp, max_var_index, sin
from .gqe import GQEData, classify, radial_weyl
from .tensor import Residual

logger = logging.getLogger(__name__)

FIBERS = ("sphere", "flat", "hyperbolic")


@dataclass(frozen=True)
class InstanceFlags:
    """Declared properties; None means the instance makes no claim."""

    einstein: Optional[bool] = None
    conformally_flat: Optional[bool] = None
    harmonic_weyl: Optional[bool] = None
    radial_weyl_zero: Optional[bool] = None
    gqe_class: Optional[str] = None
    constant_curvature: Optional[float] = None


@dataclass(frozen=True, eq=False)
class ZooInstance:
    key: str
    metric: MetricField
    gqe: Optional[GQEData] = None
    flags: InstanceFlags = InstanceFlags()
    potential: Optional[ScalarExpr] = None
    normalizations: Dict[str, float] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def test_potential(self) -> ScalarExpr:
        """The potential used by conformal checks: GQE f, then the attached potential, then the default."""
        if self.gqe is not None and not self.gqe.f.is_constant:
            return self.gqe.f
        if self.potential is not None:
            return self.potential
        return as_expr(settings.CONFORMAL_TEST_POTENTIAL, self.dim)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterRangeError(message)


def _radial_flag(n: int) -> Optional[bool]:
    # radial Weyl curvature is undefined below dimension 3
    return True if n >= 3 else None


def _vars(n: int) -> List[ScalarExpr]:
    return [ScalarExpr.variable(i, n) for i in range(1, n + 1)]


def _sum_squares(xs: Sequence[ScalarExpr]) -> ScalarExpr:
    total = xs[0] * xs[0]
    for x in xs[1:]:
        total = total + x * x
    return total


# ---------------------------------------------------------------------------
# Constant curvature and products
# ---------------------------------------------------------------------------

def euclidean(n: int) -> ZooInstance:
    _require(n >= 2, f"euclidean needs n >= 2, got {n}")
    one = ScalarExpr.constant(1.0, n)
    M = MetricField.diagonal([one] * n, name=f"euclidean:{n}")
    flags = InstanceFlags(einstein=True, conformally_flat=True, harmonic_weyl=True, constant_curvature=0.0)
    return ZooInstance(f"euclidean:{n}", M, flags=flags)


def sphere(n: int, r: float = 1.0) -> ZooInstance:
    """Stereographic chart from the south pole, coordinates scaled by r; the pole itself is excluded."""
    _require(n >= 2, f"sphere needs n >= 2, got {n}")
    _require(r > 0, f"sphere radius must be positive, got {r}")
    x = _vars(n)
    q = _sum_squares(x)
    factor = (4.0 * r * r) / ((1.0 + q) ** 2)
    M = MetricField.conformally_flat(factor, n, constraints=[4.0 - q], box=[(-2.0, 2.0)] * n, name=f"sphere:{n},{r!r}")
    data = GQEData.build(0.0, 0.0, (n - 1) / (r * r), n)
    flags = InstanceFlags(
        einstein=True, conformally_flat=True, harmonic_weyl=True, radial_weyl_zero=_radial_flag(n),
        gqe_class="trivial", constant_curvature=1.0 / (r * r),
    )
    return ZooInstance(f"sphere:{n},{r!r}", M, data, flags, normalizations={"sphere_radius": float(r)})


def hyperbolic(n: int) -> ZooInstance:
    """Poincare ball, restricted to |x| < 0.9."""
    _require(n >= 2, f"hyperbolic needs n >= 2, got {n}")
    x = _vars(n)
    q = _sum_squares(x)
    factor = 4.0 / ((1.0 - q) ** 2)
    M = MetricField.conformally_flat(factor, n, constraints=[0.81 - q], box=[(-0.9, 0.9)] * n, name=f"hyperbolic:{n}")
    data = GQEData.build(0.0, 0.0, -(n - 1.0), n)
    flags = InstanceFlags(
        einstein=True, conformally_flat=True, harmonic_weyl=True, radial_weyl_zero=_radial_flag(n),
        gqe_class="trivial", constant_curvature=-1.0,
    )
    return ZooInstance(f"hyperbolic:{n}", M, data, flags)


def _flat_times_sphere(k: int, n: int, r: float, name: str) -> MetricField:
    x = _vars(n)
    q = _sum_squares(x[k:])
    factor = (4.0 * r * r) / ((1.0 + q) ** 2)
    one = ScalarExpr.constant(1.0, n)
    diag = [one] * k + [factor] * (n - k)
    return MetricField.diagonal(diag, constraints=[4.0 - q], box=[(-2.0, 2.0)] * n, name=name)


def product_flat_sphere(k: int, n: int, r: float = 1.0) -> ZooInstance:
    """R^k x S^(n-k)(r) in the chart x1..xk flat, x(k+1)..xn stereographic."""
    _require(n >= 4 and 2 <= k <= n - 2, f"product needs 2 <= k <= n-2 and n >= 4, got k={k}, n={n}")
    _require(r > 0, f"sphere radius must be positive, got {r}")
    key = f"product:{k},{n},{r!r}"
    flags = InstanceFlags(einstein=False, conformally_flat=False, harmonic_weyl=True)
    return ZooInstance(key, _flat_times_sphere(k, n, r, key), flags=flags, normalizations={"sphere_radius": float(r)})


def remark_counterexample(k: int, n: int) -> ZooInstance:
    """
    Shrinking soliton on R^k x S^(n-k) with f = |x'|^2 / 2 over the flat factor.

    The sphere radius sqrt(n-k-1) makes Ric = g on the sphere factor, so (mu, lambda) = (0, 1).
    Weyl is harmonic but W(grad f, ., ., .) does not vanish away from x' = 0.
    """
    _require(n >= 4 and 2 <= k <= n - 2, f"remark needs 2 <= k <= n-2 and n >= 4, got k={k}, n={n}")
    r = math.sqrt(n - k - 1)
    key = f"remark:{k},{n}"
    M = _flat_times_sphere(k, n, r, key)
    f = _sum_squares(_vars(n)[:k]) * 0.5
    data = GQEData.build(f, 0.0, 1.0, n)
    flags = InstanceFlags(
        einstein=False, conformally_flat=False, harmonic_weyl=True, radial_weyl_zero=False,
        gqe_class="gradient-soliton(shrinking)",
    )
    return ZooInstance(key, M, data, flags, normalizations={"sphere_radius": r})


def gaussian_shrinker(n: int) -> ZooInstance:
    _require(n >= 2, f"gaussian needs n >= 2, got {n}")
    base = euclidean(n)
    key = f"gaussian:{n}"
    f = _sum_squares(_vars(n)) * 0.5
    flags = InstanceFlags(
        einstein=True, conformally_flat=True, harmonic_weyl=True, radial_weyl_zero=_radial_flag(n),
        gqe_class="gradient-soliton(shrinking)", constant_curvature=0.0,
    )
    return ZooInstance(key, base.metric.with_entries(base.metric.entries, key), GQEData.build(f, 0.0, 1.0, n), flags)


def round_sphere_almost_soliton(n: int) -> ZooInstance:
    """Unit sphere with f the first embedding coordinate; nabla^2 f = -f g gives lambda = n - 1 - f."""
    _require(n >= 3, f"almost-soliton needs n >= 3, got {n}")
    base = sphere(n, 1.0)
    key = f"almost-soliton:{n}"
    x = _vars(n)
    f = 2.0 * x[0] / (1.0 + _sum_squares(x))
    data = GQEData.build(f, 0.0, (n - 1.0) - f, n)
    flags = InstanceFlags(
        einstein=True, conformally_flat=True, harmonic_weyl=True, radial_weyl_zero=True,
        gqe_class="almost-soliton", constant_curvature=1.0,
    )
    return ZooInstance(key, base.metric.with_entries(base.metric.entries, key), data, flags,
                       normalizations={"sphere_radius": 1.0})


# ---------------------------------------------------------------------------
# Warped products over an interval
# ---------------------------------------------------------------------------

def _fiber_factor(fiber: str, ys: Sequence[ScalarExpr]) -> Tuple[ScalarExpr, Optional[ScalarExpr], float]:
    """Conformal factor of the unit-curvature fiber model, its domain constraint and curvature sign."""
    q = _sum_squares(ys)
    if fiber == "sphere":
        return 4.0 / ((1.0 + q) ** 2), None, 1.0
    if fiber == "flat":
        return ScalarExpr.constant(1.0, ys[0].dim), None, 0.0
    return 4.0 / ((1.0 - q) ** 2), 0.81 - q, -1.0


def warped(n: int, fiber: str, psi: ExprLike, f: ExprLike = "x1") -> ZooInstance:
    """
    dx1^2 + exp(psi(x1)) G with G a constant-curvature model on x2..xn.

    The GQE data take f = f(x1) and build lambda, mu from the warped Ricci tensor:
        lambda = (m-1)(k exp(-psi) - psi'^2/4) - psi''/2 - psi'^2/4 + psi' f'/2
        mu = (f'' - m (psi''/2 + psi'^2/4) - lambda) / f'^2
    with m = n - 1 and k the fiber curvature.
    """
    _require(n >= 3, f"warped needs n >= 3, got {n}")
    if fiber not in FIBERS:
        raise ParameterRangeError(f"Unknown fiber '{fiber}', expected one of {', '.join(FIBERS)}")
    psi_text = psi.strip() if isinstance(psi, str) else str(psi)
    psi = as_expr(psi, n)
    f = as_expr(f, n)
    _require(max_var_index(psi.node) <= 1, f"psi must depend on x1 only, got {psi}")
    _require(max_var_index(f.node) <= 1 and not f.is_constant, f"f must be a non-constant function of x1, got {f}")

    x = _vars(n)
    G, constraint, k = _fiber_factor(fiber, x[1:])
    leaf = exp(psi) * G
    one = ScalarExpr.constant(1.0, n)
    key = f"warped:{n},{fiber},{psi_text}"
    box = [(-1.0, 1.0)] + [(-0.9, 0.9) if fiber == "hyperbolic" else (-1.0, 1.0)] * (n - 1)
    M = MetricField.diagonal([one] + [leaf] * (n - 1), constraints=[] if constraint is None else [constraint],
                             box=box, name=key)

    m = n - 1.0
    dpsi, ddpsi = diff(psi, 0), diff(diff(psi, 0), 0)
    df, ddf = diff(f, 0), diff(diff(f, 0), 0)
    lam = (m - 1.0) * (k * exp(-psi) - dpsi * dpsi * 0.25) - ddpsi * 0.5 - dpsi * dpsi * 0.25 + dpsi * df * 0.5
    mu = (ddf - m * (ddpsi * 0.5 + dpsi * dpsi * 0.25) - lam) / (df * df)
    flags = InstanceFlags(conformally_flat=True, harmonic_weyl=True, radial_weyl_zero=True)
    return ZooInstance(key, M, GQEData(f, mu, lam), flags)


# ---------------------------------------------------------------------------
# Random analytic family
# ---------------------------------------------------------------------------

def _coefficients(rng: np.random.Generator) -> Tuple[float, float, float]:
    a, b = rng.uniform(-1.5, 1.5, size=2)
    c = rng.uniform(0.0, 2.0 * math.pi)
    return float(a), float(b), float(c)


def random_metric(n: int, seed: int) -> MetricField:
    """
    Diagonally dominant analytic metric on (-1, 1)^n:
        g_ii = 1.5 + 0.3 sin(a x_i + b x_(i+1) + c)
        g_ij = 0.1 cos(a x_i + b x_j + c) exp(0.1 x_k)
    Positive definite for n <= 6 on the box.
    """
    _require(2 <= n <= 6, f"random metrics are guaranteed SPD for 2 <= n <= 6, got {n}")
    rng = np.random.default_rng(seed)
    x = _vars(n)
    rows: List[List[Optional[ScalarExpr]]] = [[None] * n for _ in range(n)]
    for i in range(n):
        a, b, c = _coefficients(rng)
        rows[i][i] = 1.5 + 0.3 * sin(a * x[i] + b * x[(i + 1) % n] + c)
        for j in range(i + 1, n):
            a, b, c = _coefficients(rng)
            entry = 0.1 * cos(a * x[i] + b * x[j] + c) * exp(0.1 * x[(i + j) % n])
            rows[i][j] = rows[j][i] = entry
    return MetricField.from_rows(rows, name=f"random:{n},{seed}")


def random_potential(n: int, seed: int) -> ScalarExpr:
    """0.3 sin(a.x + c) + 0.2 cos(b.x) + 0.1 x1 x_n, a smooth potential with nonvanishing gradient almost everywhere."""
    rng = np.random.default_rng(seed + 7919)
    x = _vars(n)
    a = rng.uniform(-1.0, 1.0, size=n)
    b = rng.uniform(-1.0, 1.0, size=n)
    c = float(rng.uniform(0.0, 2.0 * math.pi))
    lin_a = x[0] * float(a[0])
    lin_b = x[0] * float(b[0])
    for i in range(1, n):
        lin_a = lin_a + x[i] * float(a[i])
        lin_b = lin_b + x[i] * float(b[i])
    return 0.3 * sin(lin_a + c) + 0.2 * cos(lin_b) + 0.1 * x[0] * x[n - 1]


def random_instance(n: int, seed: int) -> ZooInstance:
    key = f"random:{n},{seed}"
    return ZooInstance(key, random_metric(n, seed), potential=random_potential(n, seed))


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def _ints(args: List[str], count: int, key: str) -> List[int]:
    if len(args) != count:
        raise UnknownInstanceError(f"Instance '{key}' expects {count} integer parameters")
    try:
        return [int(a) for a in args]
    except ValueError:
        raise UnknownInstanceError(f"Instance '{key}' has a non-integer parameter") from None


def _sphere_args(args: List[str], key: str) -> ZooInstance:
    if len(args) not in (1, 2):
        raise UnknownInstanceError(f"Instance '{key}' expects sphere:<n>[,<r>]")
    try:
        n = int(args[0])
        r = float(args[1]) if len(args) == 2 else 1.0
    except ValueError:
        raise UnknownInstanceError(f"Instance '{key}' has a malformed parameter") from None
    return sphere(n, r)


def _product_args(args: List[str], key: str) -> ZooInstance:
    if len(args) not in (2, 3):
        raise UnknownInstanceError(f"Instance '{key}' expects product:<k>,<n>[,<r>]")
    try:
        k, n = int(args[0]), int(args[1])
        r = float(args[2]) if len(args) == 3 else 1.0
    except ValueError:
        raise UnknownInstanceError(f"Instance '{key}' has a malformed parameter") from None
    return product_flat_sphere(k, n, r)


def _warped_args(args: List[str], key: str) -> ZooInstance:
    if len(args) != 3:
        raise UnknownInstanceError(f"Instance '{key}' expects warped:<n>,<fiber>,<psi>")
    try:
        n = int(args[0])
    except ValueError:
        raise UnknownInstanceError(f"Instance '{key}' has a non-integer dimension") from None
    return warped(n, args[1].strip(), args[2])


@dataclass(frozen=True)
class _Family:
    pattern: str
    description: str
    build: Callable[[List[str], str], ZooInstance]
    maxsplit: int = -1


_REGISTRY: Dict[str, _Family] = {
    "euclidean": _Family("euclidean:<n>", "flat R^n", lambda a, k: euclidean(*_ints(a, 1, k))),
    "sphere": _Family("sphere:<n>[,<r>]", "round sphere of radius r, stereographic chart", _sphere_args),
    "hyperbolic": _Family("hyperbolic:<n>", "hyperbolic space, Poincare ball |x| < 0.9",
                          lambda a, k: hyperbolic(*_ints(a, 1, k))),
    "product": _Family("product:<k>,<n>[,<r>]", "R^k x S^(n-k)(r)", _product_args),
    "gaussian": _Family("gaussian:<n>", "Gaussian shrinking soliton, f = |x|^2/2",
                        lambda a, k: gaussian_shrinker(*_ints(a, 1, k))),
    "remark": _Family("remark:<k>,<n>", "shrinking soliton R^k x S^(n-k) with harmonic Weyl, radial Weyl nonzero",
                      lambda a, k: remark_counterexample(*_ints(a, 2, k))),
    "warped": _Family("warped:<n>,<fiber>,<psi>", "dx1^2 + exp(psi(x1)) G, fiber sphere|flat|hyperbolic, f = x1",
                      _warped_args, maxsplit=2),
    "almost-soliton": _Family("almost-soliton:<n>", "unit sphere with f the first embedding coordinate",
                              lambda a, k: round_sphere_almost_soliton(*_ints(a, 1, k))),
    "random": _Family("random:<n>,<seed>", "seeded diagonally dominant analytic metric, 2 <= n <= 6",
                      lambda a, k: random_instance(*_ints(a, 2, k))),
}

ACCEPTANCE_WARPED = ("warped:4,sphere,2*x1", "warped:5,flat,x1^2")


def resolve(key: str) -> ZooInstance:
    """Build the instance addressed by 'family:arg1,arg2,...'."""
    family, _, rest = key.strip().partition(":")
    entry = _REGISTRY.get(family)
    if entry is None:
        raise UnknownInstanceError(f"Unknown instance family '{family}' in '{key}'")
    args = [a.strip() for a in rest.split(",", entry.maxsplit)] if rest else []
    instance = entry.build(args, key)
    logger.info("resolved instance %s (dimension %d)", instance.key, instance.dim)
    return instance


def list_instances() -> List[Tuple[str, str]]:
    return [(family.pattern, family.description) for family in _REGISTRY.values()]


# ---------------------------------------------------------------------------
# Flag verification
# ---------------------------------------------------------------------------

@dataclass
class FlagCheck:
    name: str
    declared: object
    observed: object
    value: float
    ok: bool


def verify_flags(instance: ZooInstance, points: Sequence[Sequence[float]],
                 tolerances: Optional[Dict[str, float]] = None) -> List[FlagCheck]:
    """Recompute every declared flag at the given points."""
    tol = settings.tolerance_defaults()
    tol.update(tolerances or {})
    flags = instance.flags
    M = instance.metric
    n = M.dim
    jets = [metric_jet(M, p) for p in points]
    checks: List[FlagCheck] = []

    def boolean(name, declared, value, limit):
        observed = value <= limit
        checks.append(FlagCheck(name, declared, observed, float(value), observed == declared))

    if flags.einstein is not None:
        value = max(einstein_residual(j).value for j in jets)
        scalars = np.array([scalar(j) for j in jets])
        spread = float(scalars.max() - scalars.min()) / (1.0 + float(np.max(np.abs(scalars))))
        observed = value <= tol["gqe_residual"] and spread <= tol["constancy"]
        checks.append(FlagCheck("einstein", flags.einstein, observed, max(value, spread), observed == flags.einstein))

    if flags.conformally_flat is not None:
        if n >= 4:
            value = max(Residual(weyl(j), (riemann(j),), j.metric).value for j in jets)
            boolean("conformally_flat", flags.conformally_flat, value, tol["identity"])
        elif n == 3:
            value = max(Residual(cotton(j), (nabla_ricci(j),), j.metric).value for j in jets)
            boolean("conformally_flat", flags.conformally_flat, value, tol["harmonic_weyl"])
        else:
            boolean("conformally_flat", flags.conformally_flat, 0.0, 0.0)

    if flags.harmonic_weyl is not None:
        value = max(Residual(cotton(j), (nabla_ricci(j),), j.metric).value for j in jets)
        boolean("harmonic_weyl", flags.harmonic_weyl, value, tol["harmonic_weyl"])

    if flags.radial_weyl_zero is not None:
        f = instance.test_potential
        value = max(radial_weyl(j, f)[1] for j in jets)
        boolean("radial_weyl_zero", flags.radial_weyl_zero, value, tol["radial_weyl"])

    if flags.gqe_class is not None and instance.gqe is not None:
        result = classify(M, instance.gqe, points, tol["gqe_residual"], tol["constancy"])
        checks.append(FlagCheck("gqe_class", flags.gqe_class, result.label, result.max_residual,
                                result.label == flags.gqe_class))

    if flags.constant_curvature is not None:
        value = max(constant_curvature_residual(j, flags.constant_curvature).value for j in jets)
        checks.append(FlagCheck("constant_curvature", flags.constant_curvature, value <= tol["identity"],
                                value, value <= tol["identity"]))

    for check in checks:
        if not check.ok:
            logger.warning("flag %s of %s: declared %r, observed %r", check.name, instance.key, check.declared, check.observed)
    return checks
