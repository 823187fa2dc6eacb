# geo_core/jets.py
"""
Truncated Taylor (jet) arithmetic to derivative order 3.

ScalarJet carries one scalar and its partials at a point. TensorJet carries an array-valued
field: part k has the base shape followed by k derivative axes, so the layout of a derivative
index is always "appended last" (dg[a, b, c] = d_c g_ab).
"""
import itertools
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import MissingDerivativeError

MAX_ORDER = 3

# Reserved einsum letters for derivative axes. Callers spell base axes in lowercase.
_DERIV_LETTERS = "XYZ"


def _sym3(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """m_ij v_k + m_ik v_j + m_jk v_i."""
    return (m[:, :, None] * v[None, None, :]
            + m[:, None, :] * v[None, :, None]
            + m[None, :, :] * v[:, None, None])


@dataclass(frozen=True)
class ScalarJet:
    value: float
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    @property
    def dim(self) -> int:
        return self.d1.shape[0]

    @classmethod
    def constant(cls, value: float, dim: int) -> "ScalarJet":
        return cls(float(value), np.zeros(dim), np.zeros((dim, dim)), np.zeros((dim, dim, dim)))

    @classmethod
    def variable(cls, index: int, point: Sequence[float]) -> "ScalarJet":
        """Jet of the coordinate function x_{index+1} (0-based index)."""
        dim = len(point)
        d1 = np.zeros(dim)
        d1[index] = 1.0
        return cls(float(point[index]), d1, np.zeros((dim, dim)), np.zeros((dim, dim, dim)))

    def __add__(self, other: "ScalarJet") -> "ScalarJet":
        return ScalarJet(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2, self.d3 + other.d3)

    def __sub__(self, other: "ScalarJet") -> "ScalarJet":
        return ScalarJet(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2, self.d3 - other.d3)

    def __neg__(self) -> "ScalarJet":
        return ScalarJet(-self.value, -self.d1, -self.d2, -self.d3)

    def scale(self, c: float) -> "ScalarJet":
        return ScalarJet(c * self.value, c * self.d1, c * self.d2, c * self.d3)

    def __mul__(self, other: "ScalarJet") -> "ScalarJet":
        a, b = self, other
        d2_cross = np.outer(a.d1, b.d1)
        return ScalarJet(
            a.value * b.value,
            a.d1 * b.value + a.value * b.d1,
            a.d2 * b.value + d2_cross + d2_cross.T + a.value * b.d2,
            a.d3 * b.value + _sym3(a.d2, b.d1) + _sym3(b.d2, a.d1) + a.value * b.d3,
        )

    def compose(self, f0: float, f1: float, f2: float, f3: float) -> "ScalarJet":
        """Jet of phi(self) given phi and its first three derivatives at self.value."""
        u1 = self.d1
        return ScalarJet(
            f0,
            f1 * u1,
            f2 * np.outer(u1, u1) + f1 * self.d2,
            f3 * np.einsum("i,j,k->ijk", u1, u1, u1) + f2 * _sym3(self.d2, u1) + f1 * self.d3,
        )

    def parts(self) -> List[np.ndarray]:
        return [np.asarray(self.value, dtype=float), self.d1, self.d2, self.d3]


class TensorJet:
    """Array-valued jet: parts[k] has shape base_shape + (dim,) * k."""

    __slots__ = ("parts", "dim")

    def __init__(self, parts: Sequence[np.ndarray], dim: int):
        self.parts = [np.asarray(p, dtype=float) for p in parts]
        self.dim = dim

    @classmethod
    def from_scalar_jets(cls, jets: Sequence, shape: Sequence[int], dim: int) -> "TensorJet":
        """Stack a flat (row-major) list of ScalarJets into a TensorJet of the given base shape."""
        shape = tuple(shape)
        parts = []
        for k in range(MAX_ORDER + 1):
            stacked = np.array([j.parts()[k] for j in jets], dtype=float)
            parts.append(stacked.reshape(shape + (dim,) * k))
        return cls(parts, dim)

    @classmethod
    def scalar(cls, jet: ScalarJet) -> "TensorJet":
        return cls(jet.parts(), jet.dim)

    @classmethod
    def constant(cls, value: np.ndarray, dim: int, order: int = MAX_ORDER) -> "TensorJet":
        value = np.asarray(value, dtype=float)
        return cls([value] + [np.zeros(value.shape + (dim,) * k) for k in range(1, order + 1)], dim)

    @property
    def order(self) -> int:
        return len(self.parts) - 1

    @property
    def shape(self) -> tuple:
        return self.parts[0].shape

    @property
    def value(self) -> np.ndarray:
        return self.parts[0]

    def truncate(self, order: int) -> "TensorJet":
        return TensorJet(self.parts[: order + 1], self.dim)

    def derivative(self) -> "TensorJet":
        """The gradient field: its base shape gains one trailing axis (the derivative index)."""
        if self.order < 1:
            raise MissingDerivativeError("Jet carries no derivative data")
        return TensorJet(self.parts[1:], self.dim)

    def transpose(self, *axes: int) -> "TensorJet":
        rank = len(self.shape)
        out = []
        for k, p in enumerate(self.parts):
            out.append(np.transpose(p, tuple(axes) + tuple(range(rank, rank + k))))
        return TensorJet(out, self.dim)

    def __getitem__(self, key) -> "TensorJet":
        return TensorJet([p[key] for p in self.parts], self.dim)

    def __add__(self, other: "TensorJet") -> "TensorJet":
        order = min(self.order, other.order)
        return TensorJet([a + b for a, b in zip(self.parts[: order + 1], other.parts[: order + 1])], self.dim)

    def __sub__(self, other: "TensorJet") -> "TensorJet":
        order = min(self.order, other.order)
        return TensorJet([a - b for a, b in zip(self.parts[: order + 1], other.parts[: order + 1])], self.dim)

    def __neg__(self) -> "TensorJet":
        return TensorJet([-p for p in self.parts], self.dim)

    def __mul__(self, c: float) -> "TensorJet":
        return TensorJet([c * p for p in self.parts], self.dim)

    __rmul__ = __mul__

    @staticmethod
    def einsum(spec: str, a: "TensorJet", b: "TensorJet") -> "TensorJet":
        """Leibniz-rule einsum of two jets. `spec` uses lowercase letters for base axes only."""
        lhs, out = spec.replace(" ", "").split("->")
        sa, sb = lhs.split(",")
        order = min(a.order, b.order)
        parts = []
        for k in range(order + 1):
            letters = _DERIV_LETTERS[:k]
            acc = None
            # Each derivative direction lands on exactly one factor.
            for mask in itertools.product((True, False), repeat=k):
                la = "".join(l for l, on_a in zip(letters, mask) if on_a)
                lb = "".join(l for l, on_a in zip(letters, mask) if not on_a)
                term = np.einsum(f"{sa}{la},{sb}{lb}->{out}{letters}", a.parts[len(la)], b.parts[len(lb)])
                acc = term if acc is None else acc + term
            parts.append(acc)
        return TensorJet(parts, a.dim)

    def inverse(self) -> "TensorJet":
        """Jet of the matrix inverse, solving D^k(g g^-1) = 0 order by order."""
        g = self
        g0_inv = np.linalg.inv(g.parts[0])
        parts = [g0_inv]
        for k in range(1, self.order + 1):
            letters = _DERIV_LETTERS[:k]
            acc = np.zeros(g0_inv.shape + (self.dim,) * k)
            for mask in itertools.product((True, False), repeat=k):
                if not any(mask):
                    continue
                lg = "".join(l for l, on_g in zip(letters, mask) if on_g)
                li = "".join(l for l, on_g in zip(letters, mask) if not on_g)
                acc = acc + np.einsum(f"ab{lg},bc{li}->ac{letters}", g.parts[len(lg)], parts[len(li)])
            parts.append(-np.einsum(f"da,ac{letters}->dc{letters}", g0_inv, acc))
        return TensorJet(parts, self.dim)
