# geo_core/tensor.py
"""
Dense multi-index tensors at a point, with a variance signature per slot.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .config import settings
from .errors import DegenerateMetricError, DimensionError, MissingMetricError, VarianceError

logger = logging.getLogger(__name__)


class Variance(str, Enum):
    COVARIANT = "cov"
    CONTRAVARIANT = "con"

    def flipped(self) -> "Variance":
        return Variance.CONTRAVARIANT if self is Variance.COVARIANT else Variance.COVARIANT


COV = Variance.COVARIANT
CON = Variance.CONTRAVARIANT


@dataclass(frozen=True, eq=False)
class TensorValue:
    components: np.ndarray
    signature: Tuple[Variance, ...]
    dim: int

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "signature", tuple(Variance(v) for v in self.signature))
        expected = (self.dim,) * len(self.signature)
        if comps.shape != expected:
            raise DimensionError(
                f"Components of shape {comps.shape} do not match rank {len(self.signature)} on dimension {self.dim}"
            )

    @classmethod
    def covariant(cls, components, dim: Optional[int] = None) -> "TensorValue":
        comps = np.asarray(components, dtype=float)
        dim = dim if dim is not None else comps.shape[0]
        return cls(comps, (COV,) * comps.ndim, dim)

    @classmethod
    def contravariant(cls, components, dim: Optional[int] = None) -> "TensorValue":
        comps = np.asarray(components, dtype=float)
        dim = dim if dim is not None else comps.shape[0]
        return cls(comps, (CON,) * comps.ndim, dim)

    @classmethod
    def scalar(cls, value: float, dim: int) -> "TensorValue":
        return cls(np.asarray(float(value)), (), dim)

    @classmethod
    def zeros(cls, signature: Sequence[Variance], dim: int) -> "TensorValue":
        return cls(np.zeros((dim,) * len(signature)), tuple(signature), dim)

    @property
    def rank(self) -> int:
        return len(self.signature)

    def _same_kind(self, other: "TensorValue") -> None:
        if self.signature != other.signature or self.dim != other.dim:
            raise VarianceError(
                f"Signature mismatch: {[v.value for v in self.signature]} vs {[v.value for v in other.signature]}"
            )

    def __add__(self, other: "TensorValue") -> "TensorValue":
        self._same_kind(other)
        return TensorValue(self.components + other.components, self.signature, self.dim)

    def __sub__(self, other: "TensorValue") -> "TensorValue":
        self._same_kind(other)
        return TensorValue(self.components - other.components, self.signature, self.dim)

    def __neg__(self) -> "TensorValue":
        return TensorValue(-self.components, self.signature, self.dim)

    def __mul__(self, c: float) -> "TensorValue":
        return TensorValue(float(c) * self.components, self.signature, self.dim)

    __rmul__ = __mul__

    def transpose(self, *axes: int) -> "TensorValue":
        return TensorValue(
            np.transpose(self.components, axes), tuple(self.signature[a] for a in axes), self.dim
        )

    def __float__(self) -> float:
        if self.rank != 0:
            raise DimensionError("Only rank-0 tensors convert to float")
        return float(self.components)


@dataclass(frozen=True, eq=False)
class MetricAtPoint:
    g: np.ndarray
    g_inv: np.ndarray
    point: Optional[Tuple[float, ...]] = field(default=None)

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    @classmethod
    def from_matrix(cls, g, point: Optional[Sequence[float]] = None, g_inv: Optional[np.ndarray] = None) -> "MetricAtPoint":
        """Validate symmetry and positive definiteness, then pair g with its inverse."""
        g = np.asarray(g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionError(f"Metric must be a square matrix, got shape {g.shape}")
        scale = max(1.0, float(np.max(np.abs(g))))
        if np.max(np.abs(g - g.T)) > 1e-12 * scale:
            raise DegenerateMetricError(point, linalg.eigvalsh(0.5 * (g + g.T)), "not symmetric")
        eigenvalues = linalg.eigvalsh(g)
        if not np.all(np.isfinite(eigenvalues)) or eigenvalues[0] <= settings.SPD_EIGENVALUE_RATIO * eigenvalues[-1] \
                or eigenvalues[-1] <= 0.0:
            raise DegenerateMetricError(point, eigenvalues)
        if g_inv is None:
            g_inv = np.linalg.inv(g)
        pt = None if point is None else tuple(float(x) for x in point)
        return cls(g, np.asarray(g_inv, dtype=float), pt)

    @property
    def tensor(self) -> TensorValue:
        return TensorValue(self.g, (COV, COV), self.dim)

    @property
    def inverse_tensor(self) -> TensorValue:
        return TensorValue(self.g_inv, (CON, CON), self.dim)


def _check_slot(t: TensorValue, slot: int) -> None:
    if not 0 <= slot < t.rank:
        raise DimensionError(f"Slot {slot} out of range for a rank-{t.rank} tensor")


def contract(t: TensorValue, i: int, j: int, metric: Optional[MetricAtPoint] = None) -> TensorValue:
    """Trace over slots i and j, inserting g or g^-1 when both slots share a variance."""
    _check_slot(t, i)
    _check_slot(t, j)
    if i == j:
        raise DimensionError("Contraction slots must be distinct")
    arr = np.moveaxis(t.components, (i, j), (0, 1))
    vi, vj = t.signature[i], t.signature[j]
    if vi != vj:
        out = np.einsum("aa...->...", arr)
    else:
        if metric is None:
            raise MissingMetricError(f"Contracting two {vi.value} slots needs a metric")
        m = metric.g_inv if vi is COV else metric.g
        out = np.einsum("ab,ab...->...", m, arr)
    signature = tuple(v for k, v in enumerate(t.signature) if k not in (i, j))
    return TensorValue(out, signature, t.dim)


def _apply_on_slot(matrix: np.ndarray, t: TensorValue, slot: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(matrix, t.components, axes=([1], [slot])), 0, slot)


def raise_index(t: TensorValue, slot: int, metric: MetricAtPoint) -> TensorValue:
    _check_slot(t, slot)
    if t.signature[slot] is not COV:
        raise VarianceError(f"Slot {slot} is already contravariant")
    signature = t.signature[:slot] + (CON,) + t.signature[slot + 1:]
    return TensorValue(_apply_on_slot(metric.g_inv, t, slot), signature, t.dim)


def lower_index(t: TensorValue, slot: int, metric: MetricAtPoint) -> TensorValue:
    _check_slot(t, slot)
    if t.signature[slot] is not CON:
        raise VarianceError(f"Slot {slot} is already covariant")
    signature = t.signature[:slot] + (COV,) + t.signature[slot + 1:]
    return TensorValue(_apply_on_slot(metric.g, t, slot), signature, t.dim)


def outer(a: TensorValue, b: TensorValue) -> TensorValue:
    if a.dim != b.dim:
        raise DimensionError(f"Outer product of tensors on dimensions {a.dim} and {b.dim}")
    return TensorValue(np.multiply.outer(a.components, b.components), a.signature + b.signature, a.dim)


def _permutation_average(t: TensorValue, slots: Sequence[int], signed: bool) -> TensorValue:
    slots = list(slots)
    for s in slots:
        _check_slot(t, s)
    if len(set(t.signature[s] for s in slots)) > 1:
        raise VarianceError("Cannot (anti)symmetrize slots of different variance")
    acc = np.zeros_like(t.components)
    perms = list(itertools.permutations(range(len(slots))))
    for perm in perms:
        axes = list(range(t.rank))
        for src, dst in zip(slots, perm):
            axes[src] = slots[dst]
        term = np.transpose(t.components, axes)
        acc += _permutation_sign(perm) * term if signed else term
    return TensorValue(acc / len(perms), t.signature, t.dim)


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def symmetrize(t: TensorValue, slots: Sequence[int]) -> TensorValue:
    return _permutation_average(t, slots, signed=False)


def antisymmetrize(t: TensorValue, slots: Sequence[int]) -> TensorValue:
    return _permutation_average(t, slots, signed=True)


def norm(t: TensorValue, metric: MetricAtPoint) -> float:
    """sqrt of the full metric contraction of t with itself."""
    if t.rank == 0:
        return abs(float(t.components))
    up = t.components
    for slot, variance in enumerate(t.signature):
        m = metric.g_inv if variance is COV else metric.g
        up = np.moveaxis(np.tensordot(m, up, axes=([1], [slot])), 0, slot)
    value = float(np.sum(up * t.components))
    return math.sqrt(max(value, 0.0))


def scale_aware_residual(residual: TensorValue, operands: Iterable[TensorValue], metric: MetricAtPoint) -> float:
    """norm(residual) / (1 + largest operand norm)."""
    scale = max((norm(op, metric) for op in operands), default=0.0)
    return norm(residual, metric) / (1.0 + scale)


@dataclass(frozen=True, eq=False)
class Residual:
    """An identity residual together with the operands that set its scale."""

    tensor: TensorValue
    operands: Tuple[TensorValue, ...]
    metric: MetricAtPoint

    @property
    def value(self) -> float:
        return scale_aware_residual(self.tensor, self.operands, self.metric)

    @property
    def absolute(self) -> float:
        return norm(self.tensor, self.metric)
