# geo_core/config.py
import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

# .env sits at the project root, two levels up from geo_core/
env_path = Path(__file__).resolve().parent.parent / ".env"
load_dotenv(dotenv_path=env_path)


class Settings(BaseSettings):
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "WARNING")

    # Sampling
    DEFAULT_SAMPLES: int = int(os.getenv("DEFAULT_SAMPLES", 20))
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", 0))
    MIN_ACCEPTANCE_RATE: float = float(os.getenv("MIN_ACCEPTANCE_RATE", 0.01))

    # Numerical policy
    SPD_EIGENVALUE_RATIO: float = float(os.getenv("SPD_EIGENVALUE_RATIO", 1e-10))
    CLUSTER_GAP: float = float(os.getenv("CLUSTER_GAP", 1e-6))
    REGULAR_POINT_THRESHOLD: float = float(os.getenv("REGULAR_POINT_THRESHOLD", 1e-6))
    FD_STEP: float = float(os.getenv("FD_STEP", 1e-4))
    WARP_GRID_SIZE: int = int(os.getenv("WARP_GRID_SIZE", 50))
    CONFORMAL_TEST_POTENTIAL: str = os.getenv("CONFORMAL_TEST_POTENTIAL", "0.3*sin(x1)*x2")

    # Default tolerances, overridable per run by name (lower-cased, without the TOL_ prefix)
    TOL_IDENTITY: float = float(os.getenv("TOL_IDENTITY", 1e-10))
    TOL_DIVERGENCE: float = float(os.getenv("TOL_DIVERGENCE", 1e-8))
    TOL_COTTON_SCHOUTEN: float = float(os.getenv("TOL_COTTON_SCHOUTEN", 1e-9))
    TOL_CONTRACTED_BIANCHI: float = float(os.getenv("TOL_CONTRACTED_BIANCHI", 1e-9))
    TOL_METRIC_COMPATIBILITY: float = float(os.getenv("TOL_METRIC_COMPATIBILITY", 1e-11))
    TOL_COMMUTATION: float = float(os.getenv("TOL_COMMUTATION", 1e-8))
    TOL_SCHOUTEN_LAW: float = float(os.getenv("TOL_SCHOUTEN_LAW", 1e-9))
    TOL_COTTON_LAW: float = float(os.getenv("TOL_COTTON_LAW", 1e-8))
    TOL_RICCI_LAW: float = float(os.getenv("TOL_RICCI_LAW", 1e-9))
    TOL_COMPOSITION: float = float(os.getenv("TOL_COMPOSITION", 1e-10))
    TOL_GQE_RESIDUAL: float = float(os.getenv("TOL_GQE_RESIDUAL", 1e-8))
    TOL_CONSTANCY: float = float(os.getenv("TOL_CONSTANCY", 1e-8))
    TOL_FIT: float = float(os.getenv("TOL_FIT", 1e-9))
    TOL_RADIAL_WEYL: float = float(os.getenv("TOL_RADIAL_WEYL", 1e-8))
    TOL_HARMONIC_WEYL: float = float(os.getenv("TOL_HARMONIC_WEYL", 1e-10))
    TOL_UMBILICITY: float = float(os.getenv("TOL_UMBILICITY", 1e-10))
    TOL_CODAZZI_MAINARDI: float = float(os.getenv("TOL_CODAZZI_MAINARDI", 1e-8))
    TOL_LEAF_DIAGNOSTICS: float = float(os.getenv("TOL_LEAF_DIAGNOSTICS", 1e-8))
    TOL_WARP_SPREAD: float = float(os.getenv("TOL_WARP_SPREAD", 1e-6))
    TOL_WARP_RECONSTRUCTION: float = float(os.getenv("TOL_WARP_RECONSTRUCTION", 1e-7))
    TOL_FIBER_EINSTEIN: float = float(os.getenv("TOL_FIBER_EINSTEIN", 1e-8))
    TOL_RADIAL_ALIGNMENT: float = float(os.getenv("TOL_RADIAL_ALIGNMENT", 1e-9))
    TOL_ORACLE: float = float(os.getenv("TOL_ORACLE", 1e-5))

    class Config:
        case_sensitive = True

    def tolerance_defaults(self) -> dict:
        return {name[4:].lower(): value for name, value in self.model_dump().items() if name.startswith("TOL_")}


settings = Settings()
