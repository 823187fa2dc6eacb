# tests/test_jets.py
import numpy as np
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from pytest import raises

from geo_core.errors import MissingDerivativeError
from geo_core.expr import eval_jet, parse
from geo_core.jets import ScalarJet, TensorJet

coords = st.floats(min_value=-0.9, max_value=0.9, allow_nan=False, allow_infinity=False)


def _jets(src_a, src_b, point):
    n = len(point)
    return eval_jet(parse(src_a, n), point), eval_jet(parse(src_b, n), point)


@given(coords, coords, coords)
def test_product_rule_matches_expression_product(a, b, c):
    p = [a, b, c]
    u, v = _jets("sin(x1)*x3 + x2^2", "exp(x2 - x3)*cos(x1)", p)
    prod = u * v
    direct = eval_jet(parse("(sin(x1)*x3 + x2^2)*(exp(x2 - x3)*cos(x1))", 3), p)
    assert_allclose(prod.value, direct.value, rtol=1e-13, atol=1e-13)
    assert_allclose(prod.d1, direct.d1, rtol=1e-12, atol=1e-12)
    assert_allclose(prod.d2, direct.d2, rtol=1e-12, atol=1e-12)
    assert_allclose(prod.d3, direct.d3, rtol=1e-11, atol=1e-11)


@given(coords, coords)
def test_compose_matches_chain_rule(a, b):
    p = [a, b]
    u = eval_jet(parse("x1*x2 + 0.5*x1", 2), p)
    t = u.value
    composed = u.compose(np.sin(t), np.cos(t), -np.sin(t), -np.cos(t))
    direct = eval_jet(parse("sin(x1*x2 + 0.5*x1)", 2), p)
    assert_allclose(composed.d3, direct.d3, rtol=1e-12, atol=1e-12)
    assert_allclose(composed.d2, direct.d2, rtol=1e-12, atol=1e-12)


def test_constant_and_variable_jets():
    c = ScalarJet.constant(2.5, 3)
    x2 = ScalarJet.variable(1, [0.1, 0.2, 0.3])
    assert c.dim == 3 and not c.d1.any()
    assert x2.value == 0.2
    assert_allclose(x2.d1, [0.0, 1.0, 0.0])
    s = (c * x2).scale(2.0) - x2
    assert_allclose(s.d1, [0.0, 4.0, 0.0])


def test_tensor_jet_from_scalar_jets_layout():
    p = [0.2, -0.4]
    entries = ["1 + x1^2", "x1*x2", "x1*x2", "2 + sin(x2)"]
    jets = [eval_jet(parse(s, 2), p) for s in entries]
    g = TensorJet.from_scalar_jets(jets, (2, 2), 2)
    assert g.shape == (2, 2)
    assert g.parts[1].shape == (2, 2, 2)
    assert g.parts[3].shape == (2, 2, 2, 2, 2)
    # derivative index appended last: d_c g_ab
    assert_allclose(g.parts[1][0, 0], [0.4, 0.0])
    assert_allclose(g.parts[1][0, 1], [-0.4, 0.2])


@given(coords, coords)
def test_inverse_jet_annihilates_product(a, b):
    p = [a, b]
    entries = ["2 + x1^2", "0.3*sin(x1*x2)", "0.3*sin(x1*x2)", "1.5 + cos(x2)*x1"]
    g = TensorJet.from_scalar_jets([eval_jet(parse(s, 2), p) for s in entries], (2, 2), 2)
    prod = TensorJet.einsum("ab,bc->ac", g, g.inverse())
    assert_allclose(prod.value, np.eye(2), atol=1e-13)
    for k in (1, 2, 3):
        assert_allclose(prod.parts[k], 0.0, atol=1e-11)


def test_einsum_leibniz_on_scalars():
    p = [0.3, 0.6]
    u, v = _jets("x1^2*x2", "sin(x2) + x1", p)
    prod = TensorJet.einsum(",->", TensorJet.scalar(u), TensorJet.scalar(v))
    direct = u * v
    for k, part in enumerate(direct.parts()):
        assert_allclose(prod.parts[k], part, atol=1e-13)


def test_truncate_and_derivative():
    u = TensorJet.scalar(eval_jet(parse("x1^3 + x2", 2), [1.0, 0.0]))
    d = u.derivative()
    assert d.order == 2
    assert_allclose(d.value, [3.0, 1.0])
    with raises(MissingDerivativeError):
        u.truncate(0).derivative()


def test_transpose_keeps_derivative_axes_last():
    p = [0.2, 0.5]
    entries = ["x1", "x2^2", "x1*x2", "1"]
    t = TensorJet.from_scalar_jets([eval_jet(parse(s, 2), p) for s in entries], (2, 2), 2)
    tt = t.transpose(1, 0)
    assert_allclose(tt.parts[1][0, 1], t.parts[1][1, 0])
    assert_allclose(tt.parts[2][1, 0], t.parts[2][0, 1])
