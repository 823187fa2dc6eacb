# app/core/config.py
from geo_core.config import Settings, settings

__all__ = ["Settings", "settings"]
