# app/models/report.py
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel

Status = Literal["pass", "fail", "xfail", "xpass", "skipped"]


# One identity / property check aggregated over the sample points
class IdentityResult(BaseModel):
    name: str
    status: Status
    tolerance: Optional[float] = None
    max_residual: Optional[float] = None
    mean_residual: Optional[float] = None
    worst_point: Optional[Tuple[float, ...]] = None
    points: int = 0
    expected_failure: bool = False
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status in ("fail", "xpass")


class SuiteReport(BaseModel):
    name: str
    checks: List[IdentityResult] = []

    @property
    def passed(self) -> bool:
        return not any(c.failed for c in self.checks)

    def check(self, name: str) -> IdentityResult:
        return next(c for c in self.checks if c.name == name)


# A sampled point that could not be evaluated (outside the chart, not SPD, jet domain error)
class RejectedPoint(BaseModel):
    point: Tuple[float, ...]
    error: str


class Environment(BaseModel):
    instance: str
    dimension: int
    seed: int
    samples: int
    suites: List[str]
    tolerances: Dict[str, float]
    normalizations: Dict[str, float] = {}
    generated_at: str = ""


class VerificationReport(BaseModel):
    environment: Environment
    suites: List[SuiteReport] = []
    rejected_points: List[RejectedPoint] = []
    passed: bool = True

    def suite(self, name: str) -> SuiteReport:
        return next(s for s in self.suites if s.name == name)
