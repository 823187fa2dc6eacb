# app/suites/gqe.py
from geo_core import gqe
from geo_core.curvature import cotton, nabla_ricci
from geo_core.tensor import Residual

from .base import SkipCheck, Suite, SuiteContext, require_dim, single

suite = Suite("gqe", "The equation Ric + nabla^2 f - mu df (x) df = lambda g and its hypotheses")


def _data(ctx: SuiteContext) -> gqe.GQEData:
    if ctx.instance.gqe is None:
        raise SkipCheck("instance carries no GQE data")
    return ctx.instance.gqe


@suite.check("gqe_residual", tolerance="gqe_residual")
def gqe_residual(ctx: SuiteContext, jet):
    return gqe.gqe_residual(jet, _data(ctx)).value


@suite.check("trace_consistency", tolerance="identity")
def trace_consistency(ctx: SuiteContext, jet):
    return gqe.trace_residual(jet, _data(ctx))


@suite.check("mu_lambda_fit", tolerance="fit")
def mu_lambda_fit(ctx: SuiteContext, jet):
    """Distance between the least-squares (mu, lambda) and the declared functions."""
    data = _data(ctx)
    fit = gqe.fit_mu_lambda(jet, data.f)
    lam = data.lam(jet.point)
    err = abs(fit.lam - lam) / (1.0 + abs(lam))
    if fit.regular:
        mu = data.mu(jet.point)
        err = max(err, abs(fit.mu - mu) / (1.0 + abs(mu)))
    return err


@suite.check("classification", per_point=False)
def classification(ctx: SuiteContext):
    data = _data(ctx)
    result = gqe.classify(ctx.instance.metric, data, ctx.points, ctx.tolerances["gqe_residual"],
                          ctx.tolerances["constancy"])
    declared = ctx.instance.flags.gqe_class
    detail = (f"class {result.label}, einstein {result.einstein}, mu in {result.mu_range!r}, "
              f"lambda in {result.lambda_range!r}")
    if declared is None:
        return single(0.0 if result.tag != "not-gqe" else 1.0, detail, "identity", result.worst_point)
    return single(0.0 if result.label == declared else 1.0, f"declared {declared}, {detail}", "identity",
                  result.worst_point)


@suite.check("harmonic_weyl", tolerance="harmonic_weyl")
def harmonic_weyl(ctx: SuiteContext, jet):
    _data(ctx)
    require_dim(ctx, 3)
    return Residual(cotton(jet), (nabla_ricci(jet),), jet.metric).value


@suite.check("radial_weyl", tolerance="radial_weyl", expect_failure=lambda inst: inst.flags.radial_weyl_zero is False)
def radial_weyl(ctx: SuiteContext, jet):
    data = _data(ctx)
    require_dim(ctx, 3)
    return gqe.radial_weyl(jet, data.f)[1]
