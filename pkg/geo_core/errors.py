# geo_core/errors.py
from typing import Optional, Sequence


class GeometryError(Exception):
    """Base class for every error raised by geo_core."""


class ExprSyntaxError(GeometryError):
    """Malformed expression source. `offset` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownIdentifierError(GeometryError):
    def __init__(self, name: str, offset: int, message: Optional[str] = None):
        super().__init__(message or f"Unknown identifier '{name}' (at byte {offset})")
        self.name = name
        self.offset = offset


class NonSmoothFunctionError(UnknownIdentifierError):
    def __init__(self, name: str, offset: int):
        super().__init__(
            name, offset,
            f"Function '{name}' is not smooth and cannot be used (at byte {offset})",
        )


class VariableIndexError(GeometryError):
    def __init__(self, index: int, dim: int, offset: Optional[int] = None):
        where = f" (at byte {offset})" if offset is not None else ""
        super().__init__(f"Variable x{index} out of range for chart dimension {dim}{where}")
        self.index = index
        self.dim = dim
        self.offset = offset


class JetDomainError(GeometryError):
    """Expression evaluated outside its smooth domain."""

    def __init__(self, message: str, subexpression: str, point: Optional[Sequence[float]] = None):
        self.subexpression = subexpression
        self.point = None if point is None else tuple(float(x) for x in point)
        super().__init__(f"{message} in '{subexpression}' at point {self.point}")


class ChartDomainError(GeometryError):
    def __init__(self, point: Sequence[float], detail: str = ""):
        self.point = tuple(float(x) for x in point)
        super().__init__(f"Point {self.point} lies outside the chart domain{': ' + detail if detail else ''}")


class DegenerateMetricError(GeometryError):
    def __init__(self, point: Optional[Sequence[float]], eigenvalues: Sequence[float], detail: str = "not positive definite"):
        self.point = None if point is None else tuple(float(x) for x in point)
        self.eigenvalues = tuple(float(x) for x in eigenvalues)
        super().__init__(f"Metric {detail} at point {self.point} (eigenvalues {self.eigenvalues})")


class VarianceError(GeometryError):
    pass


class MissingMetricError(GeometryError):
    pass


class MissingDerivativeError(GeometryError):
    pass


class DimensionError(GeometryError):
    pass


class NotAdaptedChartError(GeometryError):
    pass


class WarpSplitError(GeometryError):
    pass


class SamplingError(GeometryError):
    pass


class UnknownInstanceError(GeometryError):
    pass


class ParameterRangeError(GeometryError):
    pass
