# tests/test_curvature.py
import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from pytest import mark, raises

from geo_core.curvature import (
    MetricField,
    constant_curvature_residual,
    contracted_bianchi,
    cotton,
    cotton_schouten_residual,
    cotton_symmetry_residual,
    cov_derivative,
    curvature_pack,
    divergence_identity_residual,
    einstein_residual,
    first_bianchi_residual,
    hessian,
    laplacian,
    metric_compatibility_residual,
    metric_jet,
    nabla_ricci,
    ricci,
    ricci_commutator,
    riemann,
    riemann_symmetry_residual,
    scalar,
    sectional_curvature,
    weyl,
    weyl_trace_residual,
)
from geo_core.errors import ChartDomainError, DegenerateMetricError, DimensionError, MissingDerivativeError
from geo_core.sampling import sample_metric_points
from geo_core.tensor import CON, COV, Residual
from geo_core.zoo import euclidean, hyperbolic, product_flat_sphere, random_instance, random_metric, sphere

seeds = st.integers(min_value=0, max_value=2**31 - 1)


@mark.parametrize("n", [3, 4, 5])
def test_sphere_sign_anchor(n):
    inst = sphere(n, 1.0)
    rng = np.random.default_rng(n)
    for p in sample_metric_points(inst.metric, 20, seed=n):
        jet = metric_jet(inst.metric, p)
        assert constant_curvature_residual(jet, 1.0).value <= 1e-10
    for _ in range(100):
        v, w = rng.normal(size=n), rng.normal(size=n)
        assert sectional_curvature(jet, v, w) > 0.0


@mark.parametrize("r", [0.5, 2.0])
def test_sphere_radius_scales_curvature(r):
    inst = sphere(3, r)
    jet = metric_jet(inst.metric, [0.3, -0.2, 0.4])
    assert constant_curvature_residual(jet, 1.0 / r**2).value <= 1e-10
    assert_allclose(scalar(jet), 6.0 / r**2, rtol=1e-10)
    assert_allclose(sectional_curvature(jet, [1, 0, 0], [0, 1, 1]), 1.0 / r**2, rtol=1e-10)


def test_hyperbolic_is_negatively_curved():
    inst = hyperbolic(4)
    jet = metric_jet(inst.metric, [0.1, 0.2, -0.3, 0.05])
    assert constant_curvature_residual(jet, -1.0).value <= 1e-10
    assert sectional_curvature(jet, [1, 2, 0, 0], [0, 1, 0, 3]) < 0.0


def test_euclidean_is_flat():
    jet = metric_jet(euclidean(4).metric, [0.1, 0.2, 0.3, 0.4])
    assert not riemann(jet).components.any()
    assert scalar(jet) == 0.0


def test_flat_metric_in_polar_coordinates():
    M = MetricField.diagonal(["1", "x1^2"], box=[(0.1, 2.0), (-3.0, 3.0)])
    jet = metric_jet(M, [1.3, 0.4])
    assert_allclose(riemann(jet).components, 0.0, atol=1e-13)
    # G^1_22 = -r, G^2_12 = 1/r
    gamma = jet.curvature.gamma.value
    assert_allclose(gamma[0, 1, 1], -1.3)
    assert_allclose(gamma[1, 0, 1], 1.0 / 1.3)


def test_product_flat_sphere_ricci_and_weyl():
    inst = product_flat_sphere(2, 4, 1.0)
    p = [0.3, -0.7, 0.2, 0.5]
    jet = metric_jet(inst.metric, p)
    Ric = ricci(jet).components
    g = jet.metric.g
    assert_allclose(Ric[:2, :], 0.0, atol=1e-12)
    assert_allclose(Ric[2:, 2:], g[2:, 2:], rtol=1e-10, atol=1e-12)
    assert_allclose(scalar(jet), 2.0, rtol=1e-10)
    assert Residual(weyl(jet), (riemann(jet),), jet.metric).value > 0.05
    assert Residual(cotton(jet), (nabla_ricci(jet),), jet.metric).value <= 1e-10
    assert einstein_residual(jet).value > 0.1


@settings(max_examples=5)
@given(seeds, st.sampled_from([3, 4, 5]))
def test_algebraic_identities_on_random_metrics(seed, n):
    inst = random_instance(n, seed)
    p = sample_metric_points(inst.metric, 1, seed)[0]
    jet = metric_jet(inst.metric, p)
    assert riemann_symmetry_residual(jet).value <= 1e-10
    assert first_bianchi_residual(jet).value <= 1e-10
    assert metric_compatibility_residual(jet).value <= 1e-11
    assert contracted_bianchi(jet).value <= 1e-9
    assert weyl_trace_residual(jet).value <= 1e-10
    assert cotton_symmetry_residual(jet).value <= 1e-10
    assert cotton_schouten_residual(jet).value <= 1e-9
    if n >= 4:
        assert divergence_identity_residual(jet).value <= 1e-8


@settings(max_examples=5)
@given(seeds)
def test_weyl_vanishes_in_dimension_three(seed):
    M = random_metric(3, seed)
    jet = metric_jet(M, sample_metric_points(M, 1, seed)[0])
    assert Residual(weyl(jet), (riemann(jet),), jet.metric).value <= 1e-10


def test_ricci_commutation_on_random_metric(random4, random_points4):
    for p in random_points4:
        jet = metric_jet(random4.metric, p)
        assert ricci_commutator(random4.test_potential, jet).value <= 1e-8


def test_laplacian_and_hessian():
    jet = metric_jet(euclidean(3).metric, [0.2, 0.1, -0.4])
    assert_allclose(laplacian("0.5*(x1^2 + x2^2 + x3^2)", jet), 3.0)
    # first embedding coordinate of the unit sphere: nabla^2 f = -f g
    inst = sphere(3, 1.0)
    p = [0.4, -0.3, 0.6]
    sjet = metric_jet(inst.metric, p)
    f = "2*x1/(1 + x1^2 + x2^2 + x3^2)"
    fv = 2 * 0.4 / (1 + 0.16 + 0.09 + 0.36)
    assert_allclose(hessian(f, sjet).components, -fv * sjet.metric.g, atol=1e-12)


def test_curvature_pack_by_dimension():
    pack3 = curvature_pack(metric_jet(sphere(3).metric, [0.1, 0.2, 0.3]))
    assert pack3.schouten is not None and pack3.weyl is not None
    assert pack3.div_weyl is None
    pack2 = curvature_pack(metric_jet(sphere(2).metric, [0.1, 0.2]))
    assert pack2.schouten is None and pack2.weyl is None
    assert_allclose(pack2.scalar, 2.0, rtol=1e-10)
    pack4 = curvature_pack(metric_jet(sphere(4).metric, [0.1, 0.2, 0.3, 0.0]))
    assert pack4.div_weyl is not None
    assert pack4.christoffel.signature[0].value == "con"


def test_dimension_errors():
    jet2 = metric_jet(sphere(2).metric, [0.1, 0.2])
    with raises(DimensionError):
        _ = jet2.curvature.schouten
    jet3 = metric_jet(sphere(3).metric, [0.1, 0.2, 0.3])
    with raises(DimensionError):
        _ = jet3.curvature.div_weyl
    with raises(DimensionError):
        sectional_curvature(jet3, [1, 0, 0], [2, 0, 0])


def test_domain_and_degeneracy_errors():
    with raises(ChartDomainError):
        metric_jet(sphere(3).metric, [1.5, 1.5, 1.5])
    M = MetricField.diagonal(["x1", "1"])
    with raises(DegenerateMetricError):
        metric_jet(M, [-0.5, 0.0])


def test_asymmetric_entries_are_rejected():
    with raises(DimensionError):
        MetricField.from_rows([["1", "x1"], ["x2", "1"]])
    with raises(DimensionError):
        MetricField.from_rows([["1", "0"], ["0"]])


def test_cov_derivative_of_metric_and_inverse_vanishes(random4, random_points4):
    for p in random_points4:
        jet = metric_jet(random4.metric, p)
        gamma = jet.curvature.gamma
        assert np.max(np.abs(cov_derivative(jet.g, (COV, COV), gamma).value)) <= 1e-11
        assert np.max(np.abs(cov_derivative(jet.g_inv, (CON, CON), gamma).value)) <= 1e-11


def test_cov_derivative_of_scalar_is_its_gradient(random4):
    p = [0.1, -0.2, 0.3, 0.05]
    jet = metric_jet(random4.metric, p)
    f = jet.scalar_jet("sin(x1)*x3 + x2^2")
    grad = cov_derivative(f, (), jet.curvature.gamma)
    assert_allclose(grad.value, [np.cos(0.1) * 0.3, -0.4, np.sin(0.1), 0.0], atol=1e-14)


def test_cov_derivative_argument_checks(random4):
    jet = metric_jet(random4.metric, [0.1, 0.1, 0.1, 0.1])
    with raises(MissingDerivativeError):
        cov_derivative(jet.g.truncate(0), (COV, COV), jet.curvature.gamma)
    with raises(DimensionError):
        cov_derivative(jet.g, (COV,), jet.curvature.gamma)
