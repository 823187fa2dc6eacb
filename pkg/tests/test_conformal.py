# tests/test_conformal.py
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from pytest import raises

from geo_core.conformal import (
    ConformalPair,
    composition_residual,
    conformal_metric,
    cotton_conformal_gqe_residual,
    cotton_conformal_residual,
    ricci_conformal_gqe_residual,
    ricci_conformal_residual,
    schouten_conformal_residual,
)
from geo_core.curvature import cotton, metric_jet, scalar
from geo_core.errors import DimensionError
from geo_core.sampling import sample_metric_points
from geo_core.tensor import Residual
from geo_core.zoo import euclidean, gaussian_shrinker, random_instance, remark_counterexample, sphere

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def _random_case(n, seed):
    inst = random_instance(n, seed)
    p = sample_metric_points(inst.metric, 1, seed)[0]
    return inst, p


@settings(max_examples=5)
@given(seeds, st.sampled_from([3, 4, 5]))
def test_schouten_and_cotton_laws(seed, n):
    inst, p = _random_case(n, seed)
    pair = ConformalPair.build(inst.metric, inst.test_potential)
    assert schouten_conformal_residual(pair, p).value <= 1e-9
    assert cotton_conformal_residual(pair, p).value <= 1e-8
    assert cotton_conformal_gqe_residual(inst.metric, inst.test_potential, p).value <= 1e-8


@settings(max_examples=5)
@given(seeds, st.sampled_from([4, 5]))
def test_ricci_law(seed, n):
    inst, p = _random_case(n, seed)
    assert ricci_conformal_residual(inst.metric, inst.test_potential, p).value <= 1e-9


@settings(max_examples=5)
@given(seeds)
def test_cotton_is_conformally_invariant_in_dimension_three(seed):
    inst, p = _random_case(3, seed)
    pair = ConformalPair.build(inst.metric, inst.test_potential)
    base, tilde = metric_jet(pair.base, p), metric_jet(pair.rescaled, p)
    C, C_tilde = cotton(base), cotton(tilde)
    assert Residual(C_tilde - C, (C, C_tilde), base.metric).value <= 1e-8


def test_weyl_term_is_needed_off_conformal_flatness():
    inst, p = _random_case(4, 3)
    pair = ConformalPair.build(inst.metric, inst.test_potential)
    base, tilde = metric_jet(pair.base, p), metric_jet(pair.rescaled, p)
    C, C_tilde = cotton(base), cotton(tilde)
    assert Residual(C_tilde - C, (C, C_tilde), base.metric).value > 1e-6


def test_composition_law(random4, random_points4):
    for p in random_points4:
        assert composition_residual(random4.metric, random4.test_potential, "0.2*cos(x1)", p).value <= 1e-10


def test_flat_metric_rescaled_to_sphere():
    # exp(-2u) delta with u = log((1 + |x|^2)/2) is the unit sphere
    u = "log((1 + x1^2 + x2^2 + x3^2)/2)"
    rescaled = conformal_metric(euclidean(3).metric, u)
    jet = metric_jet(rescaled, [0.3, 0.1, -0.2])
    assert_allclose(scalar(jet), 6.0, rtol=1e-10)


def test_zero_entries_stay_literal():
    rescaled = conformal_metric(sphere(3).metric, "x1")
    assert rescaled.entries[0][1].is_zero
    assert not rescaled.entries[0][0].is_zero


def test_ricci_law_in_gqe_form():
    for inst in (gaussian_shrinker(4), remark_counterexample(2, 4)):
        for p in sample_metric_points(inst.metric, 3, 1):
            assert ricci_conformal_gqe_residual(inst.metric, inst.gqe, p).value <= 1e-9


def test_dimension_two_is_rejected():
    M = sphere(2).metric
    with raises(DimensionError):
        ricci_conformal_residual(M, "x1", [0.1, 0.2])
    with raises(DimensionError):
        cotton_conformal_residual(ConformalPair.build(M, "x1"), [0.1, 0.2])
