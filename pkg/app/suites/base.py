# app/suites/base.py
"""
Verification suites. Each suite module builds one `Suite` and registers its checks with
the `@suite.check(...)` decorator, the way API routers register endpoints.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set

import numpy as np

from app.models.report import IdentityResult, SuiteReport
from geo_core.curvature import MetricJet
from geo_core.errors import GeometryError
from geo_core.zoo import ZooInstance

logger = logging.getLogger(__name__)


class SkipCheck(Exception):
    """Raised by a check that does not apply to the instance at hand."""


@dataclass
class SuiteContext:
    instance: ZooInstance
    points: np.ndarray
    jets: List[MetricJet]
    tolerances: Dict[str, float]
    cache: Dict[str, object] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.instance.dim


@dataclass
class Measurement:
    """Residuals of one check: one value per point, or a single aggregate value."""

    values: Sequence[float]
    points: Sequence[Sequence[float]] = ()
    tolerance: Optional[str] = None
    detail: str = ""
    limit: Optional[float] = None  # numeric tolerance overriding the named one
    expected_failure: bool = False


@dataclass
class Check:
    name: str
    fn: Callable
    tolerance: Optional[str]
    per_point: bool
    expect_failure: Optional[Callable[[ZooInstance], bool]]


def _result(name: str, m: Measurement, tolerance: Optional[float], expected: bool) -> IdentityResult:
    values = np.asarray(m.values, dtype=float)
    if values.size == 0:
        return IdentityResult(name=name, status="skipped", tolerance=tolerance, detail=m.detail or "no points")
    worst = int(np.argmax(values))
    max_residual = float(values[worst])
    ok = tolerance is not None and max_residual <= tolerance
    if expected:
        status = "xpass" if ok else "xfail"
    else:
        status = "pass" if ok else "fail"
    worst_point = tuple(float(x) for x in m.points[worst]) if len(m.points) else None
    return IdentityResult(
        name=name,
        status=status,
        tolerance=tolerance,
        max_residual=max_residual,
        mean_residual=float(values.mean()),
        worst_point=worst_point,
        points=int(values.size),
        expected_failure=expected,
        detail=m.detail,
    )


class Suite:
    def __init__(self, name: str, description: str = ""):
        self.name = name
        self.description = description
        self.checks: List[Check] = []

    def check(self, name: str, tolerance: Optional[str] = None, per_point: bool = True,
              expect_failure: Optional[Callable[[ZooInstance], bool]] = None):
        """
        Register a check. Per-point checks are called as fn(ctx, jet) and return a residual;
        aggregate checks are called as fn(ctx) and return a Measurement, or a dict of named
        Measurements reported as 'name.key'.
        """
        def decorator(fn):
            self.checks.append(Check(name, fn, tolerance, per_point, expect_failure))
            return fn

        return decorator

    def _measure(self, check: Check, ctx: SuiteContext) -> Dict[str, Measurement]:
        if check.per_point:
            values, points = [], []
            for jet in ctx.jets:
                values.append(float(check.fn(ctx, jet)))
                points.append(jet.point)
            return {check.name: Measurement(values, points, check.tolerance)}
        out = check.fn(ctx)
        if isinstance(out, Measurement):
            if out.tolerance is None:
                out.tolerance = check.tolerance
            return {check.name: out}
        return {f"{check.name}.{key}": m for key, m in out.items()}

    def run(self, ctx: SuiteContext, expected_failures: Set[str] = frozenset()) -> SuiteReport:
        logger.info("suite %s started on %s", self.name, ctx.instance.key)
        report = SuiteReport(name=self.name)
        for check in self.checks:
            expected = bool(check.expect_failure and check.expect_failure(ctx.instance))
            expected = expected or f"{self.name}/{check.name}" in expected_failures
            try:
                measured = self._measure(check, ctx)
            except SkipCheck as exc:
                report.checks.append(IdentityResult(name=check.name, status="skipped", detail=str(exc)))
                continue
            except GeometryError as exc:
                logger.warning("check %s/%s raised %s", self.name, check.name, exc)
                report.checks.append(IdentityResult(
                    name=check.name, status="xfail" if expected else "fail",
                    expected_failure=expected, detail=f"{type(exc).__name__}: {exc}",
                ))
                continue
            for name, m in measured.items():
                is_expected = expected or m.expected_failure or f"{self.name}/{name}" in expected_failures
                tol = m.limit if m.limit is not None else (None if m.tolerance is None else ctx.tolerances[m.tolerance])
                report.checks.append(_result(name, m, tol, is_expected))
        failed = [c.name for c in report.checks if c.failed]
        logger.info("suite %s finished, %d checks, %d failed", self.name, len(report.checks), len(failed))
        return report


def require_dim(ctx: SuiteContext, minimum: int) -> None:
    if ctx.dim < minimum:
        raise SkipCheck(f"needs dimension >= {minimum}, instance has {ctx.dim}")


def single(value: float, detail: str = "", tolerance: Optional[str] = None,
           point: Optional[Sequence[float]] = None) -> Measurement:
    return Measurement([value], [point] if point is not None else (), tolerance, detail)
