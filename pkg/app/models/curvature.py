# app/models/curvature.py
from typing import List, Optional, Tuple

from pydantic import BaseModel

from geo_core.curvature import CurvaturePack


# JSON rendering of a curvature snapshot at one point (0-based index layouts, derivative index last)
class CurvaturePackModel(BaseModel):
    instance: str
    point: Tuple[float, ...]
    metric: List[List[float]]
    christoffel: list
    riemann: list
    ricci: List[List[float]]
    scalar: float
    nabla_ricci: list
    nabla_scalar: List[float]
    cotton: list
    schouten: Optional[List[List[float]]] = None
    nabla_schouten: Optional[list] = None
    weyl: Optional[list] = None
    div_weyl: Optional[list] = None

    @classmethod
    def from_pack(cls, instance: str, pack: CurvaturePack) -> "CurvaturePackModel":
        def listed(t):
            return None if t is None else t.components.tolist()

        return cls(
            instance=instance,
            point=pack.point,
            metric=listed(pack.metric),
            christoffel=listed(pack.christoffel),
            riemann=listed(pack.riemann),
            ricci=listed(pack.ricci),
            scalar=pack.scalar,
            nabla_ricci=listed(pack.nabla_ricci),
            nabla_scalar=listed(pack.nabla_scalar),
            cotton=listed(pack.cotton),
            schouten=listed(pack.schouten),
            nabla_schouten=listed(pack.nabla_schouten),
            weyl=listed(pack.weyl),
            div_weyl=listed(pack.div_weyl),
        )
