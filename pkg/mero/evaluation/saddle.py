"""Exhaustive saddle-point oracle for tiny finite-support instances."""
from dataclasses import dataclass
from itertools import product
from typing import Sequence
import logging
import math

import numpy as np

from ..errors import InvalidArgumentError, UnsupportedError
from ..geometry import PrimalGeometry
from ..problems.loss import LogisticLoss
from ..problems.sources.finite_support import FiniteSupportDistribution

logger = logging.getLogger(__name__)

MAX_DIMENSION = 2
MAX_DISTRIBUTIONS = 3
MAX_GRID_POINTS = 2_000_000


def min_grid_resolution(geom: PrimalGeometry) -> float:
    """Finest spacing whose grid over [−radius, radius]^d stays within MAX_GRID_POINTS."""
    per_axis = int(math.floor(MAX_GRID_POINTS ** (1.0 / geom.dimension) + 1e-9))
    return 2.0 * geom.radius / (per_axis - 1)


def ball_grid(geom: PrimalGeometry, resolution: float) -> np.ndarray:
    """Points of the regular grid with the given spacing that lie in the ball, shape (k, d).

    The grid is capped at MAX_GRID_POINTS; in two dimensions that rules out resolutions finer
    than ``min_grid_resolution`` (about 0.0071 at radius 5, 0.0014 at radius 1).
    """
    if not resolution > 0:
        raise InvalidArgumentError(f"grid resolution must be positive, got {resolution}")
    axis = np.arange(-geom.radius, geom.radius + resolution / 2, resolution)
    if axis.size ** geom.dimension > MAX_GRID_POINTS:
        raise UnsupportedError(
            f"a {geom.dimension}-d grid over radius {geom.radius} at resolution {resolution} has "
            f"{axis.size}^{geom.dimension} points, over the cap of {MAX_GRID_POINTS}; "
            f"resolution must be at least {min_grid_resolution(geom):.3g} for this ball"
        )
    mesh = np.stack(np.meshgrid(*([axis] * geom.dimension), indexing="ij"), axis=-1).reshape(-1, geom.dimension)
    return mesh[np.linalg.norm(mesh, axis=1) <= geom.radius + 1e-12]


def simplex_grid(m: int, resolution: float) -> np.ndarray:
    steps = max(1, int(round(1.0 / resolution)))
    points = [c for c in product(range(steps + 1), repeat=m) if sum(c) == steps]
    return np.asarray(points, dtype=float) / steps


@dataclass
class SaddleOracle:
    """φ(w, q) = Σᵢ qᵢ[Rᵢ(w) − Rᵢ*] solved on a grid over W, exactly in q."""
    distributions: Sequence[FiniteSupportDistribution]
    loss: LogisticLoss
    grid: np.ndarray
    risks: np.ndarray        # (m, k) exact risks at every grid point
    rstar: np.ndarray        # grid minimum of each risk
    phi_star: float
    w_star: np.ndarray
    q_star: np.ndarray
    resolution: float

    def exact_risks(self, w: np.ndarray) -> np.ndarray:
        return np.array([d.risk(self.loss, w) for d in self.distributions])

    def max_excess(self, w: np.ndarray) -> float:
        """max_q φ(w, q); φ is linear in q, so the maximum sits at a vertex."""
        return float(np.max(self.exact_risks(w) - self.rstar))

    def min_phi(self, q: np.ndarray) -> float:
        """min over the grid of φ(·, q)."""
        return float(np.min(np.asarray(q, dtype=float) @ (self.risks - self.rstar[:, None])))

    def epsilon(self, w: np.ndarray, q: np.ndarray) -> float:
        return self.max_excess(w) - self.min_phi(q)


def _risk_table(distributions, loss: LogisticLoss, grid: np.ndarray) -> np.ndarray:
    table = np.empty((len(distributions), grid.shape[0]))
    for i, dist in enumerate(distributions):
        margins = dist.labels[:, None] * (dist.atoms @ grid.T)
        table[i] = dist.probs @ (loss.scale * np.logaddexp(0.0, -margins))
    return table


def brute_force_saddle(
    distributions: Sequence[FiniteSupportDistribution],
    loss: LogisticLoss,
    geom: PrimalGeometry,
    resolution: float = 1e-3,
    simplex_resolution: float = 0.01,
) -> SaddleOracle:
    """Grid search for min_w max_q φ on d ≤ 2, m ≤ 3 instances.

    Raises UnsupportedError for larger instances and for resolutions whose ball grid would
    exceed MAX_GRID_POINTS, which in two dimensions means anything finer than
    ``min_grid_resolution(geom)``.
    """
    if len(distributions) > MAX_DISTRIBUTIONS or geom.dimension > MAX_DIMENSION:
        raise UnsupportedError(
            f"brute force handles d ≤ {MAX_DIMENSION} and m ≤ {MAX_DISTRIBUTIONS}, "
            f"got d={geom.dimension}, m={len(distributions)}"
        )
    if any(d.dimension != geom.dimension for d in distributions):
        raise InvalidArgumentError("distribution and geometry dimensions differ")

    grid = ball_grid(geom, resolution)
    risks = _risk_table(distributions, loss, grid)
    rstar = risks.min(axis=1)
    excess = risks - rstar[:, None]
    worst = excess.max(axis=0)
    best = int(np.argmin(worst))

    weights = simplex_grid(len(distributions), simplex_resolution)
    inner = np.concatenate([(chunk @ excess).min(axis=1) for chunk in np.array_split(weights, max(1, len(weights) // 256))])
    q_star = weights[int(np.argmax(inner))]
    logger.debug(f"Brute-force saddle over {grid.shape[0]} grid points: φ*={worst[best]:.6g}")
    return SaddleOracle(
        distributions=list(distributions),
        loss=loss,
        grid=grid,
        risks=risks,
        rstar=rstar,
        phi_star=float(worst[best]),
        w_star=grid[best],
        q_star=q_star,
        resolution=resolution,
    )
