# tests/test_expr.py
import math

import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from pytest import mark, raises

from geo_core.errors import (
    DimensionError,
    ExprSyntaxError,
    JetDomainError,
    NonSmoothFunctionError,
    UnknownIdentifierError,
    VariableIndexError,
)
from geo_core.expr import BinOp, Call, Neg, Num, ScalarExpr, Var, diff, eval_jet, evaluate, parse, render, sin, substitute

MIXED = ("exp(0.3*x1)*cos(x2) + x1^3*x2 - log(2 + x1*x2) + sqrt(3 + x2)/(1.5 + sin(x1))"
         " + tanh(x1 - x2) + (1.5 + x1)^x2 + cosh(x2)*sinh(0.5*x1) - tan(0.4*x1*x2)")

coords = st.floats(min_value=-0.9, max_value=0.9, allow_nan=False, allow_infinity=False)


def _scaled(c, node):
    return BinOp("*", Num(c), node)


# each builder maps arguments in [-1, 1] to a value in [-1, 1]
UNARY = [
    Neg,
    lambda a: Call("sin", a),
    lambda a: Call("cos", a),
    lambda a: Call("tanh", a),
    lambda a: _scaled(0.6, Call("tan", a)),
    lambda a: _scaled(0.8, Call("sinh", a)),
    lambda a: _scaled(0.6, Call("cosh", a)),
    lambda a: Call("exp", BinOp("-", a, Num(1.0))),
    lambda a: _scaled(0.9, Call("log", BinOp("+", Num(2.0), a))),
    lambda a: BinOp("-", Call("sqrt", BinOp("+", Num(2.0), a)), Num(1.0)),
    lambda a: BinOp("^", a, Num(2.0)),
]
BINARY = [
    lambda a, b: _scaled(0.5, BinOp("+", a, b)),
    lambda a, b: _scaled(0.5, BinOp("-", a, b)),
    lambda a, b: BinOp("*", a, b),
    lambda a, b: BinOp("/", a, BinOp("+", Num(2.0), b)),
    lambda a, b: _scaled(0.3, BinOp("^", BinOp("+", Num(2.0), a), b)),
]


def bounded_trees(depth):
    """Trees on two variables, composed up to `depth` levels, bounded by 1 on the unit box."""
    tree = st.one_of(st.sampled_from([Var(1), Var(2)]), st.floats(min_value=0.0, max_value=1.0).map(Num))
    for _ in range(depth):
        tree = st.one_of(
            tree,
            st.tuples(st.sampled_from(UNARY), tree).map(lambda t: t[0](t[1])),
            st.tuples(st.sampled_from(BINARY), tree, tree).map(lambda t: t[0](t[1], t[2])),
        )
    return tree


MONOMIALS = [(i, j) for i in range(4) for j in range(4 - i)]


def cubic(coefficients):
    x1, x2 = ScalarExpr.variable(1, 2), ScalarExpr.variable(2, 2)
    total = ScalarExpr.constant(0.0, 2)
    for c, (i, j) in zip(coefficients, MONOMIALS):
        total = total + c * x1 ** i * x2 ** j
    return total


@mark.parametrize("src, point, expected", [
    ("-x1^2", [3.0], 9.0),
    ("-2^2", [0.0], 4.0),
    ("-(x1^2)", [3.0], -9.0),
    ("1 - x1^3", [2.0], -7.0),
    ("2^3^2", [0.0], 512.0),
    ("2^-1", [0.0], 0.5),
    ("1 - 2 - 3", [0.0], -4.0),
    ("8 / 4 / 2", [0.0], 1.0),
    ("2*x1 + x1*x1", [1.5], 5.25),
    ("  sqrt( x1 )  ", [4.0], 2.0),
    ("1e-3*x1", [2.0], 2e-3),
])
def test_parse_precedence_and_evaluate(src, point, expected):
    e = parse(src, len(point))
    assert evaluate(e, point) == expected


def test_unary_minus_binds_tighter_than_power():
    assert render(parse("-x1^2", 1).node) == "((-x1) ^ 2.0)"
    assert render(parse("2^-x1", 1).node) == "(2.0 ^ (-x1))"
    assert render(parse("-x1*x2", 2).node) == "((-x1) * x2)"


@mark.parametrize("src", ["", "   ", "x1 +", "(x1", "x1 $ 2", "sin x1", "x1 x2"])
def test_syntax_errors(src):
    with raises(ExprSyntaxError):
        parse(src, 2)


def test_syntax_error_offset_points_at_token():
    with raises(ExprSyntaxError) as info:
        parse("x1 + * x2", 2)
    assert info.value.offset == 5


def test_unknown_identifier_carries_name_and_offset():
    with raises(UnknownIdentifierError) as info:
        parse("x1 + foo(x1)", 1)
    assert info.value.name == "foo"
    assert info.value.offset == 5


@mark.parametrize("name", ["abs", "sign", "floor", "min", "max"])
def test_non_smooth_functions_are_rejected(name):
    with raises(NonSmoothFunctionError):
        parse(f"{name}(x1)", 1)


@mark.parametrize("src, dim", [("x3", 2), ("x0", 2), ("x1 + x10", 9)])
def test_variable_index_out_of_range(src, dim):
    with raises(VariableIndexError):
        parse(src, dim)


def test_dimension_must_be_positive():
    with raises(DimensionError):
        parse("1", 0)


@mark.parametrize("src, point", [
    ("log(x1)", [-1.0]),
    ("log(x1)", [0.0]),
    ("1/x1", [0.0]),
    ("x1^0.5", [-1.0]),
    ("x1^-1", [0.0]),
    ("sqrt(x1 - 1)", [1.0]),
    ("exp(exp(x1))", [10.0]),
    ("x1^x1", [-0.5]),
    ("x1^100000", [10.0]),
    ("x1^-400", [1e-3]),
    ("2^x1", [5000.0]),
])
def test_domain_errors_agree_between_value_and_jet(src, point):
    e = parse(src, 1)
    with raises(JetDomainError):
        evaluate(e, point)
    with raises(JetDomainError):
        eval_jet(e, point)


def test_domain_error_names_subexpression_and_point():
    with raises(JetDomainError) as info:
        evaluate(parse("x2 + log(x1 - 1)", 2), [0.5, 0.0])
    assert "log" in info.value.subexpression
    assert info.value.point == (0.5, 0.0)


def test_integer_power_of_negative_base_is_smooth():
    jet = eval_jet(parse("x1^3", 1), [-2.0])
    assert jet.value == -8.0
    assert_allclose([jet.d1[0], jet.d2[0, 0], jet.d3[0, 0, 0]], [12.0, -12.0, 6.0])


@given(coords, coords)
def test_jet_matches_symbolic_derivatives(a, b):
    e = parse(MIXED, 2)
    p = [a, b]
    jet = eval_jet(e, p)
    assert_allclose(jet.value, evaluate(e, p), rtol=1e-14, atol=1e-14)
    for i in range(2):
        di = diff(e, i)
        assert_allclose(jet.d1[i], evaluate(di, p), rtol=1e-11, atol=1e-11)
        for j in range(2):
            dij = diff(di, j)
            assert_allclose(jet.d2[i, j], evaluate(dij, p), rtol=1e-10, atol=1e-10)
            for k in range(2):
                assert_allclose(jet.d3[i, j, k], evaluate(diff(dij, k), p), rtol=1e-9, atol=1e-9)


@given(coords, coords)
def test_jet_derivatives_are_symmetric(a, b):
    jet = eval_jet(parse(MIXED, 2), [a, b])
    assert_allclose(jet.d2, jet.d2.T, atol=1e-13)
    for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
        assert_allclose(jet.d3, jet.d3.transpose(perm), atol=1e-12)


def test_known_derivatives_at_a_point():
    jet = eval_jet(parse("sin(x1)*x2^2", 2), [0.3, 0.7])
    assert_allclose(jet.d1, [math.cos(0.3) * 0.49, 1.4 * math.sin(0.3)])
    assert_allclose(jet.d2, [[-math.sin(0.3) * 0.49, 1.4 * math.cos(0.3)],
                             [1.4 * math.cos(0.3), 2.0 * math.sin(0.3)]])
    assert_allclose(jet.d3[0, 0, 0], -math.cos(0.3) * 0.49)
    assert_allclose(jet.d3[0, 1, 1], 2.0 * math.cos(0.3))


def test_render_reparses_to_the_same_tree():
    e = parse(MIXED, 2)
    assert parse(render(e.node), 2).node == e.node


@given(bounded_trees(6))
def test_render_then_parse_rebuilds_any_tree(node):
    assert parse(render(node), 2).node == node


@settings(max_examples=100)
@given(bounded_trees(6), coords, coords)
def test_jet_gradient_matches_central_differences(node, a, b):
    e = ScalarExpr(node, 2)
    p = np.array([a, b])
    h = 1e-4
    fd = [(evaluate(e, p + step) - evaluate(e, p - step)) / (2.0 * h) for step in h * np.eye(2)]
    assert_allclose(eval_jet(e, p).d1, fd, rtol=1e-5, atol=1e-5)


half = st.floats(min_value=-0.5, max_value=0.5)


@given(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=10, max_size=10), half, half, half, half)
def test_third_order_jets_of_cubics_are_exact(coefficients, a, b, da, db):
    e = cubic(coefficients)
    p, d = np.array([a, b]), np.array([da, db])
    jet = eval_jet(e, p)
    taylor = jet.value + jet.d1 @ d + 0.5 * d @ jet.d2 @ d + np.einsum("ijk,i,j,k->", jet.d3, d, d, d) / 6.0
    assert abs(taylor - evaluate(e, p + d)) <= 1e-13


def test_builders_compose_like_source():
    x1 = ScalarExpr.variable(1, 2)
    x2 = ScalarExpr.variable(2, 2)
    built = sin(x1) * x2 - 2.0
    assert evaluate(built, [0.4, 1.5]) == evaluate(parse("sin(x1)*x2 - 2", 2), [0.4, 1.5])


def test_literal_zero_pruning_in_diff():
    e = parse("x1*x1 + 3", 2)
    assert diff(e, 1).is_zero
    assert diff(parse("7", 2), 0).is_zero


def test_substitute_moves_expression_to_another_chart():
    e = parse("x1*x2 + x3", 3)
    on_two = substitute(e, {1: 2.0, 2: ScalarExpr.variable(1, 2), 3: ScalarExpr.variable(2, 2)}, 2)
    assert on_two.dim == 2
    assert evaluate(on_two, [0.5, 4.0]) == 5.0


def test_shared_subtrees_are_evaluated_consistently():
    x1 = ScalarExpr.variable(1, 1)
    inner = sin(x1) + 1.0
    e = inner * inner
    jet = eval_jet(e, [0.2])
    assert_allclose(jet.value, (math.sin(0.2) + 1.0) ** 2)
    assert_allclose(jet.d1[0], 2.0 * (math.sin(0.2) + 1.0) * math.cos(0.2))


def test_point_dimension_mismatch():
    with raises(DimensionError):
        evaluate(parse("x1", 2), np.zeros(3))
