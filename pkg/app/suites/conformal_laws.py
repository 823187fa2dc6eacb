# app/suites/conformal_laws.py
from geo_core import conformal as cf
from geo_core.curvature import cotton, metric_jet
from geo_core.expr import parse
from geo_core.tensor import Residual

from .base import SkipCheck, Suite, SuiteContext, require_dim

suite = Suite("conformal-laws", "Transformation of Schouten, Cotton and Ricci under g -> exp(-2u) g")

# second potential for the composition law
COMPOSITION_POTENTIAL = "0.2*cos(x1)"


def _pair(ctx: SuiteContext) -> cf.ConformalPair:
    if "conformal_pair" not in ctx.cache:
        ctx.cache["conformal_pair"] = cf.ConformalPair.build(ctx.instance.metric, ctx.instance.test_potential)
    return ctx.cache["conformal_pair"]


@suite.check("schouten_law", tolerance="schouten_law")
def schouten_law(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    return cf.schouten_conformal_residual(_pair(ctx), jet.point).value


@suite.check("cotton_law", tolerance="cotton_law")
def cotton_law(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    return cf.cotton_conformal_residual(_pair(ctx), jet.point).value


@suite.check("cotton_law_potential_form", tolerance="cotton_law")
def cotton_law_potential_form(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    return cf.cotton_conformal_gqe_residual(ctx.instance.metric, ctx.instance.test_potential, jet.point).value


@suite.check("cotton_invariance_dim3", tolerance="cotton_law")
def cotton_invariance_dim3(ctx: SuiteContext, jet):
    if ctx.dim != 3:
        raise SkipCheck("pointwise Cotton invariance is a dimension-three statement")
    tilde = metric_jet(_pair(ctx).rescaled, jet.point)
    C, C_tilde = cotton(jet), cotton(tilde)
    return Residual(C_tilde - C, (C, C_tilde), jet.metric).value


@suite.check("ricci_law", tolerance="ricci_law")
def ricci_law(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    return cf.ricci_conformal_residual(ctx.instance.metric, ctx.instance.test_potential, jet.point).value


@suite.check("ricci_law_gqe_form", tolerance="ricci_law")
def ricci_law_gqe_form(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    if ctx.instance.gqe is None:
        raise SkipCheck("instance carries no GQE data")
    return cf.ricci_conformal_gqe_residual(ctx.instance.metric, ctx.instance.gqe, jet.point).value


@suite.check("composition", tolerance="composition")
def composition(ctx: SuiteContext, jet):
    v = parse(COMPOSITION_POTENTIAL, ctx.dim)
    return cf.composition_residual(ctx.instance.metric, ctx.instance.test_potential, v, jet.point).value
