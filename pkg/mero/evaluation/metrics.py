from typing import Optional, Sequence, Tuple
import logging

import numpy as np
from scipy import stats

from ..errors import InvalidArgumentError

logger = logging.getLogger(__name__)

MIN_SLOPE_POINTS = 10


def mer(excess: Sequence[float]) -> Tuple[float, int]:
    """Maximal excess risk and the first distribution attaining it."""
    excess = np.asarray(excess, dtype=float)
    if excess.size == 0:
        raise InvalidArgumentError("excess vector is empty")
    index = int(np.argmax(excess))
    return float(excess[index]), index


def mwer(excess: Sequence[float], p: Sequence[float]) -> Tuple[float, int]:
    """Maximal weighted excess risk max pᵢ·excessᵢ."""
    excess, p = np.asarray(excess, dtype=float), np.asarray(p, dtype=float)
    if excess.shape != p.shape:
        raise InvalidArgumentError(f"{excess.size} excess values for {p.size} weights")
    return mer(p * excess)


def slope_fit(
    t: Sequence[float],
    values: Sequence[float],
    t_range: Optional[Tuple[float, float]] = None,
) -> float:
    """Least-squares slope of log(value) against log(t) over the checkpoints in ``t_range``."""
    t, values = np.asarray(t, dtype=float), np.asarray(values, dtype=float)
    if t.shape != values.shape:
        raise InvalidArgumentError(f"{t.size} checkpoints for {values.size} values")
    if t_range is not None:
        keep = (t >= t_range[0]) & (t <= t_range[1])
        t, values = t[keep], values[keep]
    if t.size < MIN_SLOPE_POINTS:
        raise InvalidArgumentError(f"need at least {MIN_SLOPE_POINTS} checkpoints in range, got {t.size}")
    positive = (values > 0) & (t > 0)
    if not positive.all():
        logger.warning(f"Dropping {int((~positive).sum())} non-positive values before the log-log fit")
    if positive.sum() < 2:
        raise InvalidArgumentError("no positive values left to fit")
    return float(stats.linregress(np.log(t[positive]), np.log(values[positive])).slope)
