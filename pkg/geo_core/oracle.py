# geo_core/oracle.py
"""
Central finite-difference recomputation of jets and curvature, used only to cross-check the
exact jet path.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import settings
from .curvature import MetricField
from .expr import ScalarExpr, eval_jet, evaluate

logger = logging.getLogger(__name__)


def relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    """max |approx - exact| / max(1, max |exact|)."""
    approx, exact = np.asarray(approx, dtype=float), np.asarray(exact, dtype=float)
    return float(np.max(np.abs(approx - exact), initial=0.0) / max(1.0, float(np.max(np.abs(exact), initial=0.0))))


def _central(fn, point: np.ndarray, h: float) -> np.ndarray:
    """Stack (fn(p + h e_k) - fn(p - h e_k)) / 2h along a trailing axis k."""
    slices = []
    for k in range(point.shape[0]):
        step = np.zeros_like(point)
        step[k] = h
        slices.append((np.asarray(fn(point + step)) - np.asarray(fn(point - step))) / (2.0 * h))
    return np.stack(slices, axis=-1)


def fd_scalar_partials(e: ScalarExpr, point: Sequence[float], h: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Partials of orders 1-3, each differenced from the jet of one order lower so that every
    estimate involves a single division by h.
    """
    h = settings.FD_STEP if h is None else h
    p = np.asarray(point, dtype=float)
    d1 = _central(lambda q: evaluate(e, q), p, h)
    d2 = _central(lambda q: eval_jet(e, q).d1, p, h)
    d3 = _central(lambda q: eval_jet(e, q).d2, p, h)
    return d1, d2, d3


def _christoffel_from(g_inv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    lowered = 0.5 * (dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1))
    return np.einsum("cd,dab->cab", g_inv, lowered)


def fd_christoffel(M: MetricField, point: Sequence[float], h: Optional[float] = None) -> np.ndarray:
    h = settings.FD_STEP if h is None else h
    p = np.asarray(point, dtype=float)
    dg = _central(M.values, p, h)
    return _christoffel_from(np.linalg.inv(M.values(p)), dg)


def fd_ricci(M: MetricField, point: Sequence[float], h: Optional[float] = None) -> np.ndarray:
    """Ricci from central differences of finite-difference Christoffel symbols."""
    h = settings.FD_STEP if h is None else h
    p = np.asarray(point, dtype=float)
    gamma = fd_christoffel(M, p, h)
    d_gamma = _central(lambda q: fd_christoffel(M, q, h), p, h)
    riemann_up = (d_gamma.transpose(0, 1, 3, 2)
                  - d_gamma.transpose(0, 3, 1, 2)
                  + np.einsum("eac,dbe->dabc", gamma, gamma)
                  - np.einsum("ebc,dae->dabc", gamma, gamma))
    riemann = np.einsum("de,eabc->abcd", M.values(p), riemann_up)
    return np.einsum("bd,abcd->ac", np.linalg.inv(M.values(p)), riemann)
