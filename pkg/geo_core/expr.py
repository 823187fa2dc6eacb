# geo_core/expr.py
"""
Closed-form coordinate expressions over a chart x1..xn.

Source grammar (whitespace insignificant):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := base ('^' factor)?         # right-associative
    base    := number | 'x<k>' | func '(' expr ')' | '(' expr ')' | '-' base

Unary minus binds tighter than '^', so "-x1^2" is (-x1)^2 and "2^-1" is 0.5.
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionError,
    ExprSyntaxError,
    JetDomainError,
    NonSmoothFunctionError,
    UnknownIdentifierError,
    VariableIndexError,
)
from .jets import ScalarJet

logger = logging.getLogger(__name__)

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt")
NON_SMOOTH = ("abs", "sign", "floor", "ceil", "min", "max", "round")

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)
_VAR_RE = re.compile(r"x([0-9]+)$")


# ---------------------------------------------------------------------------
# Tree nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not (self.value >= 0.0) or math.isinf(self.value):
            raise ValueError(f"Num literal must be finite and non-negative, got {self.value}")


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written in source


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

Number = Union[int, float]


def _const_node(value: float) -> "Node":
    value = float(value)
    return Num(value) if value >= 0.0 else Neg(Num(-value))


def render(node: Node) -> str:
    """Fully parenthesised source text; parse(render(t)) rebuilds t exactly."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{render(node.arg)})"
    if isinstance(node, BinOp):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    return f"{node.func}({render(node.arg)})"


def max_var_index(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, (Neg, Call)):
        return max_var_index(node.arg)
    if isinstance(node, BinOp):
        return max(max_var_index(node.left), max_var_index(node.right))
    return 0


def _is_constant(node: Node) -> bool:
    return max_var_index(node) == 0


# ---------------------------------------------------------------------------
# ScalarExpr
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarExpr:
    """An immutable expression tree bound to a chart dimension."""

    node: Node
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"Chart dimension must be >= 1, got {self.dim}")
        top = max_var_index(self.node)
        if top > self.dim:
            raise VariableIndexError(top, self.dim)

    @classmethod
    def constant(cls, value: Number, dim: int) -> "ScalarExpr":
        return cls(_const_node(value), dim)

    @classmethod
    def variable(cls, index: int, dim: int) -> "ScalarExpr":
        """Coordinate function x_index (1-based)."""
        if not 1 <= index <= dim:
            raise VariableIndexError(index, dim)
        return cls(Var(index), dim)

    def __str__(self) -> str:
        return render(self.node)

    @property
    def is_zero(self) -> bool:
        return isinstance(self.node, Num) and self.node.value == 0.0

    @property
    def is_constant(self) -> bool:
        return _is_constant(self.node)

    def _coerce(self, other) -> Node:
        if isinstance(other, ScalarExpr):
            if other.dim != self.dim:
                raise DimensionError(f"Cannot combine expressions on charts of dimension {self.dim} and {other.dim}")
            return other.node
        if isinstance(other, (int, float, np.floating, np.integer)):
            return _const_node(float(other))
        return NotImplemented

    def _bin(self, op: str, other, reflected: bool = False) -> "ScalarExpr":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        left, right = (rhs, self.node) if reflected else (self.node, rhs)
        return ScalarExpr(_simplify_bin(op, left, right), self.dim)

    def __add__(self, other):
        return self._bin("+", other)

    def __radd__(self, other):
        return self._bin("+", other, reflected=True)

    def __sub__(self, other):
        return self._bin("-", other)

    def __rsub__(self, other):
        return self._bin("-", other, reflected=True)

    def __mul__(self, other):
        return self._bin("*", other)

    def __rmul__(self, other):
        return self._bin("*", other, reflected=True)

    def __truediv__(self, other):
        return self._bin("/", other)

    def __rtruediv__(self, other):
        return self._bin("/", other, reflected=True)

    def __pow__(self, other):
        return self._bin("^", other)

    def __rpow__(self, other):
        return self._bin("^", other, reflected=True)

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr(_neg(self.node), self.dim)

    def apply(self, func: str) -> "ScalarExpr":
        if func not in FUNCTIONS:
            if func in NON_SMOOTH:
                raise NonSmoothFunctionError(func, 0)
            raise UnknownIdentifierError(func, 0)
        return ScalarExpr(Call(func, self.node), self.dim)

    def __call__(self, point: Sequence[float]) -> float:
        return evaluate(self, point)

    def jet(self, point: Sequence[float]) -> ScalarJet:
        return eval_jet(self, point)

    def diff(self, axis: int) -> "ScalarExpr":
        return diff(self, axis)


def _function_builder(name: str) -> Callable[[ScalarExpr], ScalarExpr]:
    def build(e: ScalarExpr) -> ScalarExpr:
        return e.apply(name)

    build.__name__ = name
    return build


exp, log, sin, cos, tan, sinh, cosh, tanh, sqrt = (_function_builder(name) for name in FUNCTIONS)


# Literal 0 / 1 pruning only; no algebraic rewriting.
def _is_num(node: Node, value: float) -> bool:
    return isinstance(node, Num) and node.value == value


def _neg(node: Node) -> Node:
    if _is_num(node, 0.0):
        return node
    return Neg(node)


def _simplify_bin(op: str, left: Node, right: Node) -> Node:
    if op == "+":
        if _is_num(left, 0.0):
            return right
        if _is_num(right, 0.0):
            return left
    elif op == "-":
        if _is_num(right, 0.0):
            return left
        if _is_num(left, 0.0):
            return _neg(right)
    elif op == "*":
        if _is_num(left, 0.0) or _is_num(right, 0.0):
            return Num(0.0)
        if _is_num(left, 1.0):
            return right
        if _is_num(right, 1.0):
            return left
    elif op == "/":
        if _is_num(left, 0.0):
            return Num(0.0)
        if _is_num(right, 1.0):
            return left
    elif op == "^":
        if _is_num(right, 0.0):
            return Num(1.0)
        if _is_num(right, 1.0):
            return left
    return BinOp(op, left, right)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset


def _tokenize(src: str) -> List[_Token]:
    tokens = []
    pos = 0
    byte_offset = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"Unexpected character '{src[pos]}'", byte_offset)
        text = m.group(0)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, text, byte_offset))
        byte_offset += len(text.encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte_offset))
    return tokens


class _Parser:
    def __init__(self, src: str, dim: int):
        self.tokens = _tokenize(src)
        self.pos = 0
        self.dim = dim

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _accept(self, text: str) -> bool:
        tok = self.current
        if tok.kind == "op" and tok.text == text:
            self.pos += 1
            return True
        return False

    def _expect(self, text: str) -> None:
        if not self._accept(text):
            tok = self.current
            found = tok.text or "end of input"
            raise ExprSyntaxError(f"Expected '{text}' but found '{found}'", tok.offset)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.current
        if tok.kind != "end":
            raise ExprSyntaxError(f"Unexpected token '{tok.text}'", tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.base()
        if self._accept("^"):
            return BinOp("^", base, self.factor())
        return base

    def base(self) -> Node:
        if self._accept("-"):
            return Neg(self.base())
        tok = self.current
        if tok.kind == "num":
            self.pos += 1
            value = float(tok.text)
            if math.isinf(value):
                raise ExprSyntaxError(f"Literal '{tok.text}' overflows a double", tok.offset)
            return Num(value)
        if tok.kind == "ident":
            return self._identifier(tok)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"Unexpected token '{found}'", tok.offset)

    def _identifier(self, tok: _Token) -> Node:
        self.pos += 1
        name = tok.text
        m = _VAR_RE.match(name)
        if m:
            index = int(m.group(1))
            if index < 1 or index > self.dim:
                raise VariableIndexError(index, self.dim, tok.offset)
            return Var(index)
        if name in NON_SMOOTH:
            raise NonSmoothFunctionError(name, tok.offset)
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(name, tok.offset)
        self._expect("(")
        arg = self.expr()
        self._expect(")")
        return Call(name, arg)


def parse(src: str, dim: int) -> ScalarExpr:
    if dim < 1:
        raise DimensionError(f"Chart dimension must be >= 1, got {dim}")
    if not src or not src.strip():
        raise ExprSyntaxError("Empty expression", 0)
    return ScalarExpr(_Parser(src, dim).parse(), dim)


def as_expr(value: Union[str, Number, ScalarExpr], dim: int) -> ScalarExpr:
    """Accept source text, a number or an expression, returning an expression on `dim`."""
    if isinstance(value, ScalarExpr):
        if value.dim != dim:
            raise DimensionError(f"Expression lives on dimension {value.dim}, expected {dim}")
        return value
    if isinstance(value, str):
        return parse(value, dim)
    return ScalarExpr.constant(value, dim)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _check_point(dim: int, point: Sequence[float]) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    if p.shape != (dim,):
        raise DimensionError(f"Point {tuple(p.ravel())} does not have dimension {dim}")
    return p


_FLOAT_FUNCS: Dict[str, Callable[[float], float]] = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "sqrt": math.sqrt,
}


def _float_pow(a: float, b: float, node: BinOp, point) -> float:
    if _is_constant(node.right) and float(b).is_integer():
        if a == 0.0 and b < 0:
            raise JetDomainError("zero raised to a negative power", render(node), point)
        return a ** int(b)
    if a <= 0.0:
        raise JetDomainError("non-positive base with non-integer exponent", render(node), point)
    return a ** b


def evaluate(e: ScalarExpr, point: Sequence[float]) -> float:
    """Value only. Raises JetDomainError exactly where eval_jet would."""
    p = _check_point(e.dim, point)
    cache: Dict[int, Tuple[Node, float]] = {}

    def ev(node: Node) -> float:
        hit = cache.get(id(node))
        if hit is not None:
            return hit[1]
        if isinstance(node, Num):
            out = node.value
        elif isinstance(node, Var):
            out = float(p[node.index - 1])
        elif isinstance(node, Neg):
            out = -ev(node.arg)
        elif isinstance(node, BinOp):
            a, b = ev(node.left), ev(node.right)
            if node.op == "+":
                out = a + b
            elif node.op == "-":
                out = a - b
            elif node.op == "*":
                out = a * b
            elif node.op == "/":
                if b == 0.0:
                    raise JetDomainError("division by zero", render(node), p)
                out = a / b
            else:
                try:
                    out = _float_pow(a, b, node, p)
                except (OverflowError, ZeroDivisionError):
                    raise JetDomainError("overflow", render(node), p) from None
        else:
            t = ev(node.arg)
            if node.func == "log" and t <= 0.0:
                raise JetDomainError("log of a non-positive value", render(node), p)
            if node.func == "sqrt" and t <= 0.0:
                raise JetDomainError("sqrt of a non-positive value", render(node), p)
            try:
                out = _FLOAT_FUNCS[node.func](t)
            except OverflowError:
                raise JetDomainError("overflow", render(node), p) from None
        if not math.isfinite(out):
            raise JetDomainError("non-finite value", render(node), p)
        cache[id(node)] = (node, out)
        return out

    return ev(e.node)


def _function_table(func: str, t: float) -> Tuple[float, float, float, float]:
    """phi(t) and its first three derivatives."""
    if func == "exp":
        v = math.exp(t)
        return v, v, v, v
    if func == "log":
        return math.log(t), 1.0 / t, -1.0 / t ** 2, 2.0 / t ** 3
    if func == "sin":
        s, c = math.sin(t), math.cos(t)
        return s, c, -s, -c
    if func == "cos":
        s, c = math.sin(t), math.cos(t)
        return c, -s, -c, s
    if func == "tan":
        v = math.tan(t)
        sec2 = 1.0 + v * v
        return v, sec2, 2.0 * v * sec2, 2.0 * sec2 * (1.0 + 3.0 * v * v)
    if func == "sinh":
        sh, ch = math.sinh(t), math.cosh(t)
        return sh, ch, sh, ch
    if func == "cosh":
        sh, ch = math.sinh(t), math.cosh(t)
        return ch, sh, ch, sh
    if func == "tanh":
        v = math.tanh(t)
        sech2 = 1.0 - v * v
        return v, sech2, -2.0 * v * sech2, sech2 * (6.0 * v * v - 2.0)
    # sqrt
    s = math.sqrt(t)
    return s, 0.5 / s, -0.25 / s ** 3, 0.375 / s ** 5


def _power_table(t: float, c: float) -> Tuple[float, float, float, float]:
    """t^c and its derivatives; falling-factorial coefficients that vanish give exact zeros."""
    out = []
    coeff = 1.0
    for j in range(4):
        out.append(coeff * t ** (c - j) if coeff != 0.0 else 0.0)
        coeff *= c - j
    return tuple(out)


def _reciprocal(jet: ScalarJet) -> ScalarJet:
    t = jet.value
    return jet.compose(1.0 / t, -1.0 / t ** 2, 2.0 / t ** 3, -6.0 / t ** 4)


class JetEvaluator:
    """
    Evaluates expressions to order-3 jets at one point.

    Sub-trees shared by identity (within one expression or across several evaluated with the
    same evaluator) are evaluated once.
    """

    def __init__(self, point: Sequence[float], dim: int):
        self.point = _check_point(dim, point)
        self.dim = dim
        self._cache: Dict[int, Tuple[Node, ScalarJet]] = {}

    def __call__(self, e: ScalarExpr) -> ScalarJet:
        if e.dim != self.dim:
            raise DimensionError(f"Expression lives on dimension {e.dim}, evaluator on {self.dim}")
        return self._eval(e.node)

    def _fail(self, message: str, node: Node):
        raise JetDomainError(message, render(node), self.point)

    def _eval(self, node: Node) -> ScalarJet:
        hit = self._cache.get(id(node))
        if hit is not None:
            return hit[1]
        if isinstance(node, Num):
            out = ScalarJet.constant(node.value, self.dim)
        elif isinstance(node, Var):
            out = ScalarJet.variable(node.index - 1, self.point)
        elif isinstance(node, Neg):
            out = -self._eval(node.arg)
        elif isinstance(node, BinOp):
            out = self._binop(node)
        else:
            out = self._call(node)
        if not math.isfinite(out.value):
            self._fail("non-finite value", node)
        self._cache[id(node)] = (node, out)
        return out

    def _binop(self, node: BinOp) -> ScalarJet:
        a = self._eval(node.left)
        if node.op == "^":
            return self._power(node, a)
        b = self._eval(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b.value == 0.0:
            self._fail("division by zero", node)
        return a * _reciprocal(b)

    def _table(self, node: Node, build, *args) -> Tuple[float, float, float, float]:
        try:
            table = build(*args)
        except (OverflowError, ZeroDivisionError):
            self._fail("overflow", node)
        if not all(math.isfinite(x) for x in table):
            self._fail("non-finite derivative", node)
        return table

    def _power(self, node: BinOp, base: ScalarJet) -> ScalarJet:
        t = base.value
        if _is_constant(node.right):
            c = self._eval(node.right).value
            if float(c).is_integer():
                if t == 0.0 and c < 0:
                    self._fail("zero raised to a negative power", node)
                return base.compose(*self._table(node, _power_table, t, int(c)))
            if t <= 0.0:
                self._fail("non-positive base with non-integer exponent", node)
            return base.compose(*self._table(node, _power_table, t, c))
        if t <= 0.0:
            self._fail("non-positive base with variable exponent", node)
        log_base = base.compose(*self._table(node, _function_table, "log", t))
        product = self._eval(node.right) * log_base
        return product.compose(*self._table(node, _function_table, "exp", product.value))

    def _call(self, node: Call) -> ScalarJet:
        arg = self._eval(node.arg)
        t = arg.value
        if node.func == "log" and t <= 0.0:
            self._fail("log of a non-positive value", node)
        if node.func == "sqrt" and t <= 0.0:
            self._fail("sqrt of a non-positive value", node)
        return arg.compose(*self._table(node, _function_table, node.func, t))


def eval_jet(e: ScalarExpr, point: Sequence[float]) -> ScalarJet:
    return JetEvaluator(point, e.dim)(e)


# ---------------------------------------------------------------------------
# Symbolic manipulation
# ---------------------------------------------------------------------------

def _diff_node(node: Node, index: int) -> Node:
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0 if node.index == index else 0.0)
    if isinstance(node, Neg):
        return _neg(_diff_node(node.arg, index))
    if isinstance(node, BinOp):
        l, r = node.left, node.right
        dl, dr = _diff_node(l, index), _diff_node(r, index)
        if node.op in "+-":
            return _simplify_bin(node.op, dl, dr)
        if node.op == "*":
            return _simplify_bin("+", _simplify_bin("*", dl, r), _simplify_bin("*", l, dr))
        if node.op == "/":
            numerator = _simplify_bin("-", _simplify_bin("*", dl, r), _simplify_bin("*", l, dr))
            return _simplify_bin("/", numerator, _simplify_bin("*", r, r))
        # a^b
        if _is_constant(r):
            exponent = _simplify_bin("-", r, Num(1.0))
            return _simplify_bin("*", _simplify_bin("*", r, _simplify_bin("^", l, exponent)), dl)
        inner = _simplify_bin(
            "+",
            _simplify_bin("*", dr, Call("log", l)),
            _simplify_bin("/", _simplify_bin("*", r, dl), l),
        )
        return _simplify_bin("*", node, inner)
    a = node.arg
    da = _diff_node(a, index)
    if _is_num(da, 0.0):
        return Num(0.0)
    if node.func == "exp":
        outer = node
    elif node.func == "log":
        return _simplify_bin("/", da, a)
    elif node.func == "sin":
        outer = Call("cos", a)
    elif node.func == "cos":
        outer = Neg(Call("sin", a))
    elif node.func == "tan":
        outer = BinOp("+", Num(1.0), BinOp("^", node, Num(2.0)))
    elif node.func == "sinh":
        outer = Call("cosh", a)
    elif node.func == "cosh":
        outer = Call("sinh", a)
    elif node.func == "tanh":
        outer = BinOp("-", Num(1.0), BinOp("^", node, Num(2.0)))
    else:
        return _simplify_bin("/", da, BinOp("*", Num(2.0), node))
    return _simplify_bin("*", outer, da)


def diff(e: ScalarExpr, axis: int) -> ScalarExpr:
    """Symbolic partial derivative along the 0-based chart axis."""
    if not 0 <= axis < e.dim:
        raise VariableIndexError(axis + 1, e.dim)
    return ScalarExpr(_diff_node(e.node, axis + 1), e.dim)


def substitute(e: ScalarExpr, mapping: Mapping[int, Union[ScalarExpr, Number]], dim: Optional[int] = None) -> ScalarExpr:
    """
    Replace variables x_k (1-based keys) by expressions on a chart of dimension `dim`.

    Variables without a mapping entry are kept as they are and must fit the target chart.
    """
    dim = e.dim if dim is None else dim
    replacement: Dict[int, Node] = {k: as_expr(v, dim).node for k, v in mapping.items()}
    memo: Dict[int, Node] = {}

    def sub(node: Node) -> Node:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Num):
            out = node
        elif isinstance(node, Var):
            out = replacement.get(node.index, node)
        elif isinstance(node, Neg):
            out = Neg(sub(node.arg))
        elif isinstance(node, BinOp):
            out = BinOp(node.op, sub(node.left), sub(node.right))
        else:
            out = Call(node.func, sub(node.arg))
        memo[key] = out
        return out

    return ScalarExpr(sub(e.node), dim)
