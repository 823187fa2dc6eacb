# app/suites/splitting.py
from geo_core import splitting
from geo_core.conformal import conformal_metric

from .base import Measurement, SkipCheck, Suite, SuiteContext, require_dim

suite = Suite("splitting", "Local warped-product structure of GQE metrics with harmonic Weyl and zero radial Weyl")


def _hypotheses_fail(inst) -> bool:
    return inst.flags.radial_weyl_zero is False or inst.flags.harmonic_weyl is False


def _potential(ctx: SuiteContext):
    require_dim(ctx, 3)
    data = ctx.instance.gqe
    if data is None or data.f.is_constant:
        raise SkipCheck("instance carries no non-constant GQE potential")
    return data.f


def _rescaled(ctx: SuiteContext):
    if "rescaled" not in ctx.cache:
        f = _potential(ctx)
        ctx.cache["rescaled"] = conformal_metric(ctx.instance.metric, f * (1.0 / (ctx.dim - 2.0)))
    return ctx.cache["rescaled"]


@suite.check("conformal_codazzi", tolerance="cotton_law", expect_failure=_hypotheses_fail)
def conformal_codazzi(ctx: SuiteContext, jet):
    return splitting.codazzi_residual(_rescaled(ctx), jet.point).value


@suite.check("pipeline", per_point=False)
def pipeline(ctx: SuiteContext):
    """Every step of the end-to-end argument, reported as pipeline.<step>."""
    f = _potential(ctx)
    result = splitting.theorem_pipeline(ctx.instance.metric, f, ctx.points, ctx.tolerances)
    expected_step = result.failed_hypothesis if _hypotheses_fail(ctx.instance) else None
    out = {}
    for step in result.steps:
        if step.value is not None:
            values, limit = [step.value], step.tolerance
        else:
            # a step that raised carries no residual; report it as a unit violation
            values, limit = ([1.0], 0.0) if step.status == "fail" else ([], None)
        detail = step.detail if step.status != "skipped" else f"skipped: {step.detail}"
        out[step.name] = Measurement(
            values, detail=detail, limit=limit if limit is not None else 0.0,
            expected_failure=step.name == expected_step,
        )
    out["verdict"] = Measurement(
        [0.0 if result.verdict == "conclusion-verified" else 1.0], detail=result.verdict, limit=0.0,
        expected_failure=expected_step is not None,
    )
    return out
