# geo_core/sampling.py
"""
Seeded rejection sampling of chart points.

Points are drawn one at a time as lo + (hi - lo) * u with u from a PCG64 generator, so a seed
fixes the point set independently of the platform.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .config import settings
from .curvature import MetricField
from .errors import SamplingError

logger = logging.getLogger(__name__)

Box = Sequence[Tuple[float, float]]


def sample_points(
    contains: Callable[[np.ndarray], bool],
    box: Box,
    count: int,
    seed: int,
    min_acceptance: Optional[float] = None,
) -> np.ndarray:
    """Return `count` points of the box accepted by `contains`, shape (count, n)."""
    if count < 1:
        raise SamplingError(f"Sample count must be positive, got {count}")
    min_acceptance = settings.MIN_ACCEPTANCE_RATE if min_acceptance is None else min_acceptance
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    rng = np.random.default_rng(seed)
    budget = math.ceil(count / min_acceptance)

    accepted: List[np.ndarray] = []
    draws = 0
    while len(accepted) < count and draws < budget:
        p = lo + (hi - lo) * rng.random(lo.shape[0])
        draws += 1
        if contains(p):
            accepted.append(p)
    if len(accepted) < count:
        raise SamplingError(
            f"Acceptance rate below {min_acceptance!r}: {len(accepted)} of {draws} draws accepted, {count} requested"
        )
    logger.debug("sampled %d points from %d draws (seed %d)", count, draws, seed)
    return np.array(accepted)


def sample_metric_points(M: MetricField, count: int, seed: int) -> np.ndarray:
    """Points of the chart domain of M, drawn from its sampling box."""
    return sample_points(M.contains, M.box, count, seed)
