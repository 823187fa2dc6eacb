# app/suites/curvature_identities.py
from geo_core import curvature as cv
from geo_core.oracle import fd_christoffel, fd_ricci, relative_error
from geo_core.zoo import verify_flags

from .base import Suite, SuiteContext, require_dim, single

suite = Suite("curvature-identities", "Algebraic and differential identities every metric satisfies")


@suite.check("riemann_symmetries", tolerance="identity")
def riemann_symmetries(ctx: SuiteContext, jet):
    return cv.riemann_symmetry_residual(jet).value


@suite.check("first_bianchi", tolerance="identity")
def first_bianchi(ctx: SuiteContext, jet):
    return cv.first_bianchi_residual(jet).value


@suite.check("metric_compatibility", tolerance="metric_compatibility")
def metric_compatibility(ctx: SuiteContext, jet):
    return cv.metric_compatibility_residual(jet).value


@suite.check("contracted_bianchi", tolerance="contracted_bianchi")
def contracted_bianchi(ctx: SuiteContext, jet):
    return cv.contracted_bianchi(jet).value


@suite.check("weyl_traces", tolerance="identity")
def weyl_traces(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    return cv.weyl_trace_residual(jet).value


@suite.check("cotton_symmetries", tolerance="identity")
def cotton_symmetries(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    return cv.cotton_symmetry_residual(jet).value


@suite.check("cotton_schouten", tolerance="cotton_schouten")
def cotton_schouten(ctx: SuiteContext, jet):
    require_dim(ctx, 3)
    return cv.cotton_schouten_residual(jet).value


@suite.check("weyl_divergence", tolerance="divergence")
def weyl_divergence(ctx: SuiteContext, jet):
    require_dim(ctx, 4)
    return cv.divergence_identity_residual(jet).value


@suite.check("ricci_commutation", tolerance="commutation")
def ricci_commutation(ctx: SuiteContext, jet):
    return cv.ricci_commutator(ctx.instance.test_potential, jet).value


@suite.check("oracle_christoffel", tolerance="oracle")
def oracle_christoffel(ctx: SuiteContext, jet):
    return relative_error(fd_christoffel(ctx.instance.metric, jet.point), cv.christoffel(jet).components)


@suite.check("oracle_ricci", tolerance="oracle")
def oracle_ricci(ctx: SuiteContext, jet):
    return relative_error(fd_ricci(ctx.instance.metric, jet.point), cv.ricci(jet).components)


@suite.check("declared_flags", per_point=False)
def declared_flags(ctx: SuiteContext):
    """One entry per declared flag: residual 0 when the recomputed property matches, 1 otherwise."""
    checks = verify_flags(ctx.instance, ctx.points, ctx.tolerances)
    return {
        c.name: single(0.0 if c.ok else 1.0, f"declared {c.declared!r}, observed {c.observed!r}, value {c.value!r}",
                       tolerance="identity")
        for c in checks
    }
