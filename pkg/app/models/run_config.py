# app/models/run_config.py
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, create_model, field_validator, model_validator

from app.core.config import settings

SUITE_NAMES = ("curvature-identities", "conformal-laws", "gqe", "splitting")

# Per-run tolerance set: one float field per known tolerance name, defaults from settings
Tolerances = create_model(
    "Tolerances",
    __config__=ConfigDict(extra="forbid"),
    **{name: (float, Field(default=value, gt=0.0)) for name, value in settings.tolerance_defaults().items()},
)


# GQE data of an inline instance, as expression source text
class InlineGQE(BaseModel):
    f: str
    mu: str = "0"
    lam: str


# A metric given directly as expressions instead of a zoo key
class InlineInstance(BaseModel):
    dim: int = Field(ge=2)
    metric: List[List[str]]
    constraints: List[str] = []
    box: Optional[List[Tuple[float, float]]] = None
    potential: Optional[str] = None
    gqe: Optional[InlineGQE] = None
    name: str = "inline"

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.metric) != self.dim or any(len(row) != self.dim for row in self.metric):
            raise ValueError(f"metric must be a {self.dim} x {self.dim} array of expressions")
        return self


# Body of a config file, or the equivalent CLI flags
class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: Optional[str] = None
    inline: Optional[InlineInstance] = None
    suites: List[str] = Field(default=["all"], validate_default=True)
    samples: int = Field(default=settings.DEFAULT_SAMPLES, ge=1)
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0)
    tolerances: Dict[str, float] = {}
    expected_failures: List[str] = []  # "suite/check" names
    out: Optional[str] = None

    @field_validator("suites")
    @classmethod
    def expand_suites(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one suite is required")
        unknown = [s for s in value if s != "all" and s not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; expected {list(SUITE_NAMES)} or 'all'")
        if "all" in value:
            return list(SUITE_NAMES)
        return [s for s in SUITE_NAMES if s in value]

    @field_validator("tolerances")
    @classmethod
    def known_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        known = Tolerances.model_fields
        unknown = sorted(set(value) - set(known))
        if unknown:
            raise ValueError(f"unknown tolerance names {unknown}")
        bad = sorted(name for name, tol in value.items() if not tol > 0.0)
        if bad:
            raise ValueError(f"tolerances must be positive: {bad}")
        return value

    @model_validator(mode="after")
    def one_instance(self):
        if (self.instance is None) == (self.inline is None):
            raise ValueError("exactly one of 'instance' and 'inline' must be given")
        return self

    def resolved_tolerances(self) -> Dict[str, float]:
        return Tolerances(**self.tolerances).model_dump()
