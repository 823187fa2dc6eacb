# tests/test_splitting.py
import numpy as np
from numpy.testing import assert_allclose
from pytest import fixture, mark, raises

from geo_core.conformal import conformal_metric
from geo_core.config import settings
from geo_core.curvature import MetricField, metric_jet
from geo_core.errors import DimensionError, NotAdaptedChartError, WarpSplitError
from geo_core.sampling import sample_metric_points
from geo_core.splitting import (
    AdaptedChartMetric,
    LeafGeometry,
    cluster_eigenvalues,
    codazzi_cotton_consistency,
    codazzi_mainardi_all,
    codazzi_mainardi_residual,
    codazzi_residual,
    eigen_split,
    fiber_einstein_check,
    fiber_metric,
    leaf_mean_curvature_diagnostics,
    ricci_eigenstructure,
    second_fundamental_form,
    theorem_pipeline,
    umbilicity_residual,
    warp_split,
)
from geo_core.tensor import MetricAtPoint
from geo_core.zoo import ACCEPTANCE_WARPED, gaussian_shrinker, random_metric, remark_counterexample, resolve, sphere


def _rescaled(inst):
    return conformal_metric(inst.metric, inst.gqe.f * (1.0 / (inst.dim - 2.0)))


@fixture(scope="module")
def warped4():
    return resolve(ACCEPTANCE_WARPED[0])


@fixture(scope="module")
def warped4_points(warped4):
    return sample_metric_points(warped4.metric, 6, 11)


def test_cluster_eigenvalues():
    clusters = cluster_eigenvalues([2.0, 1.0, 1.0 + 1e-9])
    assert [m for _, m in clusters] == [2, 1]
    assert_allclose([v for v, _ in clusters], [1.0, 2.0], rtol=1e-8)
    assert [m for _, m in cluster_eigenvalues([0.0, 1.0, 2.0])] == [1, 1, 1]
    # the gap is relative to the largest magnitude
    assert len(cluster_eigenvalues([1e6, 1e6 + 0.5], gap=1e-6)) == 1


def test_eigen_split_and_alignment():
    g = MetricAtPoint.from_matrix(np.diag([1.0, 2.0, 2.0]))
    T = np.diag([5.0, 4.0, 4.0])
    split = eigen_split(T, g, covector=np.array([3.0, 0.0, 0.0]))
    assert split.multiplicities == (1, 2)
    assert_allclose(split.radial_alignment, 1.0)
    tilted = eigen_split(T, g, covector=np.array([1.0, 1.0, 0.0]))
    assert tilted.radial_alignment < 0.9
    assert eigen_split(T, g, covector=np.zeros(3)).radial_alignment is None


def test_adapted_chart_detection(warped4):
    assert AdaptedChartMetric.is_adapted(warped4.metric)
    assert AdaptedChartMetric.is_adapted(_rescaled(warped4))
    with raises(NotAdaptedChartError):
        AdaptedChartMetric(random_metric(3, 0))


def test_second_fundamental_form_of_warped_leaves(warped4, warped4_points):
    # dx1^2 + exp(2 x1) G: h = (psi'/2) g_leaf = g_leaf, H = n - 1
    for p in warped4_points:
        h, H = second_fundamental_form(warped4.metric, p)
        g_leaf = warped4.metric.values(p)[1:, 1:]
        assert_allclose(h, g_leaf, rtol=1e-12, atol=1e-12)
        assert_allclose(H, 3.0, rtol=1e-12)


@mark.parametrize("key", ACCEPTANCE_WARPED)
def test_leaves_are_umbilic_and_satisfy_codazzi_mainardi(key):
    inst = resolve(key)
    A = AdaptedChartMetric(_rescaled(inst))
    for p in sample_metric_points(inst.metric, 4, 5):
        assert umbilicity_residual(A, p).value <= 1e-10
        assert np.max(np.abs(codazzi_mainardi_all(A, p))) <= 1e-8
        assert abs(codazzi_mainardi_residual(A, p, 2, 3, 2)) <= 1e-8


def test_codazzi_mainardi_on_a_non_umbilic_foliation():
    M = MetricField.diagonal(["1", "exp(x1)", "exp(2*x1 + x2)"])
    p = [0.2, -0.3, 0.5]
    assert umbilicity_residual(M, p).value > 0.1
    assert np.max(np.abs(codazzi_mainardi_all(M, p))) <= 1e-10


def test_codazzi_mainardi_index_range(warped4):
    with raises(NotAdaptedChartError):
        codazzi_mainardi_residual(warped4.metric, [0.1, 0.2, 0.3, 0.4], 1, 2, 3)


@mark.parametrize("key", ACCEPTANCE_WARPED)
def test_leaf_mean_curvature_diagnostics(key):
    inst = resolve(key)
    points = sample_metric_points(inst.metric, 5, 8)
    diag = leaf_mean_curvature_diagnostics(_rescaled(inst), points)
    assert diag.points == 5
    assert diag.max_leaf_dH <= 1e-8
    assert diag.max_traced_codazzi <= 1e-8
    assert diag.max_geodesic <= 1e-8
    assert diag.max_mean_curvature_residual <= 1e-8
    assert not diag.inconclusive


def test_conformal_schouten_is_codazzi_on_warped(warped4, warped4_points):
    rescaled = _rescaled(warped4)
    for p in warped4_points[:3]:
        assert codazzi_residual(rescaled, p).value <= 1e-8


def test_conformal_schouten_is_not_codazzi_on_remark():
    inst = remark_counterexample(2, 4)
    rescaled = _rescaled(inst)
    assert codazzi_residual(rescaled, [0.6, -0.5, 0.2, 0.1]).value > 1e-4


def test_codazzi_cotton_consistency_on_random_metric():
    M = random_metric(4, 9)
    for p in sample_metric_points(M, 3, 9):
        assert codazzi_cotton_consistency(M, p).value <= 1e-9


@mark.parametrize("key", ACCEPTANCE_WARPED)
def test_ricci_eigenstructure_is_radial(key):
    inst = resolve(key)
    n = inst.dim
    for p in sample_metric_points(inst.metric, 3, 2):
        split = ricci_eigenstructure(inst.metric, inst.gqe.f, p)
        assert split.multiplicities == (1, n - 1)
        assert split.radial_alignment >= 1.0 - 1e-9


def test_warp_split_recovers_psi(warped4, warped4_points):
    A = AdaptedChartMetric(_rescaled(warped4))
    grid = np.linspace(-0.8, 0.8, 9)
    split = warp_split(A, grid, warped4_points[:3, 1:])
    # leaf block is exp(2 x1 - x1) G
    assert_allclose(split.psi, grid - grid[0], atol=1e-10)
    assert_allclose(split.phi, 1.0, atol=1e-10)
    assert split.residual <= 1e-7
    assert split.spread <= 1e-10


def test_warp_split_rejects_non_warped_leaves():
    M = MetricField.diagonal(["1", "exp(x1)", "exp(2*x1)"])
    with raises(WarpSplitError):
        warp_split(M, np.linspace(-0.5, 0.5, 5), [[0.0, 0.0]])


@mark.parametrize("grid", [[0.1], [0.2, 0.1], [[0.0, 0.1]]])
def test_warp_split_grid_validation(warped4, grid):
    with raises(WarpSplitError):
        warp_split(warped4.metric, grid, [[0.0, 0.0, 0.0]])


def test_fiber_metric_and_einstein_check(warped4):
    fiber = fiber_metric(warped4.metric, 0.0)
    assert fiber.dim == 3
    ys = sample_metric_points(fiber, 4, 1)
    check = fiber_einstein_check(fiber, ys)
    assert check.einstein(1e-8)
    assert check.constant_curvature <= 1e-8
    assert_allclose(check.einstein_constants, 2.0, rtol=1e-9)
    flat_fiber = fiber_metric(resolve(ACCEPTANCE_WARPED[1]).metric, 0.3)
    flat = fiber_einstein_check(flat_fiber, [[0.1, 0.2, 0.3, 0.4]])
    assert flat.max_traceless_ricci == 0.0
    assert flat.constant_curvature is None


def test_fiber_check_of_a_curve_is_trivial():
    check = fiber_einstein_check(MetricField.diagonal(["2"]), [])
    assert check.trivially_satisfied and check.einstein(1e-12)


@mark.slow
@mark.parametrize("key", ACCEPTANCE_WARPED)
def test_pipeline_verifies_warped_instances(key):
    inst = resolve(key)
    n = inst.dim
    points = sample_metric_points(inst.metric, 8, 11)
    result = theorem_pipeline(inst.metric, inst.gqe.f, points)
    failing = [(s.name, s.value, s.detail) for s in result.steps if s.status == "fail"]
    assert result.verdict == "conclusion-verified", failing
    assert result.step("eigen_multiplicities").detail.startswith(f"observed [(1, {n - 1})]")
    for name in ("umbilicity", "codazzi_mainardi", "leaf_constant_H", "mean_curvature_formula", "warp_split",
                 "fiber_einstein"):
        assert result.step(name).status == "pass"
    if n == 4:
        assert result.step("fiber_constant_curvature").status == "pass"
        assert result.step("conformally_flat").status == "pass"


def test_pipeline_stops_at_failed_hypothesis():
    inst = remark_counterexample(2, 4)
    points = sample_metric_points(inst.metric, 6, 3)
    result = theorem_pipeline(inst.metric, inst.gqe.f, points)
    assert result.verdict == "hypothesis-failed"
    assert result.failed_hypothesis == "radial_weyl"
    assert result.step("harmonic_weyl").status == "pass"
    assert [s.name for s in result.steps] == ["harmonic_weyl", "radial_weyl"]


def test_pipeline_skips_leaf_steps_off_adapted_charts():
    inst = gaussian_shrinker(4)
    points = sample_metric_points(inst.metric, 5, 2)
    result = theorem_pipeline(inst.metric, inst.gqe.f, points)
    assert result.verdict == "conclusion-verified"
    assert result.step("umbilicity").status == "skipped"
    assert result.step("conformal_codazzi").status == "pass"
    assert result.step("conformally_flat").status == "pass"


def test_radial_alignment_limit_comes_from_tolerances(warped4, warped4_points):
    assert settings.tolerance_defaults()["radial_alignment"] == settings.TOL_RADIAL_ALIGNMENT
    result = theorem_pipeline(warped4.metric, warped4.gqe.f, warped4_points, {"radial_alignment": 0.25})
    step = result.step("radial_alignment")
    assert step.tolerance == 0.25
    assert step.status == "pass"


def test_pipeline_needs_dimension_three():
    with raises(DimensionError):
        theorem_pipeline(sphere(2).metric, "x1", [[0.1, 0.2]])


def test_leaf_geometry_mean_curvature_jet(warped4):
    leaf = LeafGeometry(metric_jet(warped4.metric, [0.1, 0.2, -0.3, 0.4]))
    H = leaf.mean_curvature_jet()
    assert_allclose(float(H.value), 3.0, rtol=1e-12)
    assert_allclose(H.parts[1], 0.0, atol=1e-11)
