"""Mirror geometries: the Euclidean ball for models, the entropic simplex for weights,
and their merged product used by the saddle-point analysis."""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import DomainError, InvalidArgumentError, NumericError

logger = logging.getLogger(__name__)

# Points are plain float64 vectors; the aliases document which domain they live in.
PrimalPoint = np.ndarray
SimplexPoint = np.ndarray

POINT_TOLERANCE = 1e-9
SIMPLEX_TOLERANCE = 1e-12


class Direction(str, Enum):
    ASCENT = "ascent"
    DESCENT = "descent"


@dataclass(frozen=True)
class PrimalGeometry:
    """Euclidean ball of the given radius with ν_w(w) = ½‖w‖², centered at o_w = 0."""
    dimension: int
    radius: float = 5.0

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidArgumentError(f"dimension must be positive, got {self.dimension}")
        if not self.radius > 0:
            raise InvalidArgumentError(f"radius must be positive, got {self.radius}")

    @property
    def d_bound(self) -> float:
        """D with max_w B_w(w, 0) = radius²/2 ≤ D²."""
        return self.radius / math.sqrt(2.0)

    def origin(self) -> PrimalPoint:
        return np.zeros(self.dimension)

    def project(self, w: np.ndarray) -> PrimalPoint:
        norm = float(np.linalg.norm(w))
        if norm > self.radius:
            return w * (self.radius / norm)
        return w

    def check(self, w: np.ndarray) -> PrimalPoint:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dimension,):
            raise InvalidArgumentError(
                f"expected a point of dimension {self.dimension}, got shape {w.shape}"
            )
        if np.linalg.norm(w) > self.radius + POINT_TOLERANCE:
            raise DomainError(f"point with norm {np.linalg.norm(w):.6g} lies outside the ball")
        return w


@dataclass(frozen=True)
class SimplexGeometry:
    """Probability simplex Δ_m with the negative-entropy distance-generating function."""
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise InvalidArgumentError(f"m must be at least 1, got {self.m}")

    @property
    def q_bound(self) -> float:
        return math.log(self.m)

    def center(self) -> SimplexPoint:
        return np.full(self.m, 1.0 / self.m)

    def check(self, q: np.ndarray) -> SimplexPoint:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.m,):
            raise InvalidArgumentError(f"expected {self.m} weights, got shape {q.shape}")
        if np.any(q < 0) or abs(q.sum() - 1.0) > SIMPLEX_TOLERANCE * max(1, self.m):
            raise DomainError(f"weights {q} are not on the simplex")
        return q


@dataclass(frozen=True)
class ProductGeometry:
    """W × Δ_m with ν(w, q) = ν_w/(2D²) + ν_q/(2 ln m).

    For m = 1 the simplex is a single point and its terms are dropped.
    """
    primal: PrimalGeometry
    simplex: SimplexGeometry

    def _weights(self) -> Tuple[float, float]:
        d_sq = self.primal.d_bound ** 2
        log_m = self.simplex.q_bound
        return 1.0 / (2.0 * d_sq), (1.0 / (2.0 * log_m) if log_m > 0 else 0.0)

    def bregman(self, x: Tuple[np.ndarray, np.ndarray], x_prime: Tuple[np.ndarray, np.ndarray]) -> float:
        a, b = self._weights()
        return a * bregman_primal(self.primal, x[0], x_prime[0]) + b * bregman_simplex(
            self.simplex, x[1], x_prime[1]
        )

    def norm(self, x: Tuple[np.ndarray, np.ndarray]) -> float:
        a, b = self._weights()
        return math.sqrt(a * float(np.dot(x[0], x[0])) + b * float(np.sum(np.abs(x[1]))) ** 2)

    def dual_norm(self, g: Tuple[np.ndarray, np.ndarray]) -> float:
        d_sq = self.primal.d_bound ** 2
        g_w, g_q = np.asarray(g[0], dtype=float), np.asarray(g[1], dtype=float)
        return math.sqrt(
            2.0 * d_sq * float(np.dot(g_w, g_w))
            + 2.0 * float(np.max(np.abs(g_q))) ** 2 * self.simplex.q_bound
        )

    def component_steps(self, eta: float) -> Tuple[float, float]:
        """η^w = 2ηD² and η^q = 2η ln m."""
        return 2.0 * eta * self.primal.d_bound ** 2, 2.0 * eta * self.simplex.q_bound


def _as_vector(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float))


def bregman_primal(geom: PrimalGeometry, u: PrimalPoint, v: PrimalPoint) -> float:
    """½‖u − v‖²."""
    u, v = _as_vector(u), _as_vector(v)
    if u.shape != (geom.dimension,) or v.shape != (geom.dimension,):
        raise InvalidArgumentError(
            f"dimension mismatch: geometry {geom.dimension}, got {u.shape} and {v.shape}"
        )
    diff = u - v
    return 0.5 * float(np.dot(diff, diff))


def bregman_simplex(geom: SimplexGeometry, u: SimplexPoint, v: SimplexPoint) -> float:
    """KL(u ‖ v) with 0·ln 0 = 0."""
    u, v = _as_vector(u), _as_vector(v)
    if u.shape != (geom.m,) or v.shape != (geom.m,):
        raise InvalidArgumentError(f"expected {geom.m} weights, got {u.shape} and {v.shape}")
    support = u > 0
    if np.any(v[support] <= 0):
        raise DomainError("KL divergence undefined: v has a zero where u is positive")
    value = float(np.sum(u[support] * np.log(u[support] / v[support])))
    return max(value, 0.0)


def mirror_step_primal(geom: PrimalGeometry, w: PrimalPoint, g: np.ndarray, eta: float) -> PrimalPoint:
    """Projected gradient step, the closed form of the Euclidean prox on the ball."""
    if not eta > 0:
        raise InvalidArgumentError(f"step size must be positive, got {eta}")
    g = _as_vector(g)
    if g.shape != (geom.dimension,):
        raise InvalidArgumentError(f"expected a gradient of dimension {geom.dimension}, got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite entries in primal gradient")
    return geom.project(np.asarray(w, dtype=float) - eta * g)


def mirror_step_simplex(
    geom: SimplexGeometry,
    q: SimplexPoint,
    g: np.ndarray,
    eta: float,
    direction: Direction = Direction.ASCENT,
) -> SimplexPoint:
    """Entropic prox: q'ᵢ ∝ qᵢ·exp(±η gᵢ), computed in the log domain."""
    if not eta > 0:
        raise InvalidArgumentError(f"step size must be positive, got {eta}")
    g = _as_vector(g)
    if g.shape != (geom.m,):
        raise InvalidArgumentError(f"expected {geom.m} gradient entries, got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite entries in simplex gradient")
    q = np.asarray(q, dtype=float)
    sign = 1.0 if Direction(direction) is Direction.ASCENT else -1.0
    support = q > 0
    logits = np.full(geom.m, -np.inf)
    logits[support] = np.log(q[support]) + sign * eta * g[support]
    logits[support] -= logits[support].max()
    weights = np.zeros(geom.m)
    weights[support] = np.exp(logits[support])
    return weights / weights.sum()


def joint_mirror_step(
    geom: ProductGeometry,
    x: Tuple[PrimalPoint, SimplexPoint],
    g: Tuple[np.ndarray, np.ndarray],
    eta: float,
) -> Tuple[PrimalPoint, SimplexPoint]:
    """One merged prox step on W × Δ_m: descent in w along g[0], ascent in q along g[1]."""
    if not eta > 0:
        raise InvalidArgumentError(f"step size must be positive, got {eta}")
    eta_w, eta_q = geom.component_steps(eta)
    w_next = mirror_step_primal(geom.primal, x[0], g[0], eta_w)
    if geom.simplex.m == 1:
        return w_next, np.ones(1)
    q_next = mirror_step_simplex(geom.simplex, x[1], g[1], eta_q, Direction.ASCENT)
    return w_next, q_next
