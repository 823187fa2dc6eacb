# app/runner.py
import logging
from datetime import datetime, timezone
from typing import List, Tuple

import numpy as np

from app.models.report import Environment, RejectedPoint, VerificationReport
from app.models.run_config import InlineInstance, RunConfig
from app.suites import conformal_laws, curvature_identities, gqe, splitting
from app.suites.base import SuiteContext
from geo_core.curvature import MetricField, MetricJet, metric_jet
from geo_core.errors import ChartDomainError, DegenerateMetricError, JetDomainError
from geo_core.expr import parse
from geo_core.gqe import GQEData
from geo_core.sampling import sample_metric_points
from geo_core.zoo import ZooInstance, resolve

logger = logging.getLogger(__name__)

# Registered suites, in report order
SUITES = {s.name: s for s in (curvature_identities.suite, conformal_laws.suite, gqe.suite, splitting.suite)}


def build_instance(config: RunConfig) -> ZooInstance:
    if config.instance is not None:
        return resolve(config.instance)
    return inline_instance(config.inline)


def inline_instance(spec: InlineInstance) -> ZooInstance:
    n = spec.dim
    M = MetricField.from_rows(spec.metric, spec.constraints, spec.box, name=spec.name)
    data = None
    if spec.gqe is not None:
        data = GQEData.build(spec.gqe.f, spec.gqe.mu, spec.gqe.lam, n)
    potential = parse(spec.potential, n) if spec.potential else None
    return ZooInstance(f"inline:{spec.name}", M, data, potential=potential)


def evaluate_points(instance: ZooInstance, points: np.ndarray) -> Tuple[np.ndarray, List[MetricJet], List[RejectedPoint]]:
    """Metric jets at every point; points where the metric cannot be evaluated are rejected, not skipped."""
    kept, jets, rejected = [], [], []
    for p in points:
        try:
            jets.append(metric_jet(instance.metric, p))
            kept.append(p)
        except (ChartDomainError, DegenerateMetricError, JetDomainError) as exc:
            logger.warning("rejected point %s: %s", tuple(float(x) for x in p), exc)
            rejected.append(RejectedPoint(point=tuple(float(x) for x in p), error=f"{type(exc).__name__}: {exc}"))
    return np.array(kept).reshape(-1, instance.dim), jets, rejected


def run(config: RunConfig) -> VerificationReport:
    instance = build_instance(config)
    tolerances = config.resolved_tolerances()
    points = sample_metric_points(instance.metric, config.samples, config.seed)
    kept, jets, rejected = evaluate_points(instance, points)
    ctx = SuiteContext(instance=instance, points=kept, jets=jets, tolerances=tolerances)

    environment = Environment(
        instance=instance.key,
        dimension=instance.dim,
        seed=config.seed,
        samples=config.samples,
        suites=list(config.suites),
        tolerances=tolerances,
        normalizations=dict(instance.normalizations),
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    report = VerificationReport(environment=environment, rejected_points=rejected)
    expected = set(config.expected_failures)
    for name in config.suites:
        report.suites.append(SUITES[name].run(ctx, expected))
    report.passed = not rejected and all(s.passed for s in report.suites)
    logger.info("run on %s finished: %s", instance.key, "passed" if report.passed else "FAILED")
    return report
