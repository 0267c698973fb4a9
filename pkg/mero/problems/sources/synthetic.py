from typing import List, Optional, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ...errors import InvalidArgumentError
from ..base_oracle import DistributionOracle, OracleKind, Purpose, stream_seed
from ..task import Task

logger = logging.getLogger(__name__)


class SyntheticTaskSpec(BaseModel):
    """Noisy linear classification tasks around a shared direction."""
    m: int = Field(6, ge=1)
    dimension: int = 1000
    sphere_radius_d: float = 0.2
    flip_base: float = 0.05
    # explicit per-distribution label flip probabilities, overriding flip_base·i
    flip_probs: Optional[List[float]] = None
    # every distribution shares w0* and the same noise level
    aligned: bool = False
    seed: int = Field(0, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def _check_noise(self) -> "SyntheticTaskSpec":
        if not 0.0 < self.sphere_radius_d < 2.0:
            raise ValueError(f"sphere_radius_d must lie in (0, 2), got {self.sphere_radius_d}")
        if self.flip_probs is not None:
            if len(self.flip_probs) != self.m:
                raise ValueError(f"flip_probs needs {self.m} entries, got {len(self.flip_probs)}")
            if any(not 0.0 <= p < 0.5 for p in self.flip_probs):
                raise ValueError("flip_probs entries must lie in [0, 0.5)")
        elif not 0.0 < self.flip_base * self.m < 0.5:
            raise ValueError(f"flip_base·m must lie in (0, 0.5), got {self.flip_base * self.m}")
        return self

    def clean_probs(self) -> np.ndarray:
        """Probability pᵢ that distribution i reports the clean label."""
        if self.aligned:
            return np.full(self.m, 1.0 - self.flip_base)
        if self.flip_probs is not None:
            return 1.0 - np.asarray(self.flip_probs, dtype=float)
        return 1.0 - self.flip_base * np.arange(1, self.m + 1)


class SyntheticOracle(DistributionOracle):
    """x ~ N(0, I), y = sgn⟨x, w*⟩ kept with probability clean_prob, flipped otherwise."""

    kind = OracleKind.SYNTHETIC

    def __init__(self, w_star: np.ndarray, clean_prob: float, seed, index=None, budget=None):
        super().__init__(dimension=w_star.shape[0], seed=seed, index=index, budget=budget)
        self.w_star = w_star
        self.clean_prob = clean_prob

    def _sample(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        X = self.rng.standard_normal((n, self.dimension))
        clean = np.where(X @ self.w_star >= 0.0, 1.0, -1.0)
        keep = self.rng.random(n) < self.clean_prob
        return X, np.where(keep, clean, -clean)


def true_classifiers(spec: SyntheticTaskSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Return (w0*, W*) where W* has one unit-norm row per distribution."""
    if spec.dimension < 2:
        raise InvalidArgumentError(f"synthetic tasks need dimension ≥ 2, got {spec.dimension}")
    # spawn key (0, 0) is reserved for task structure; sample streams use purpose codes ≥ 1
    rng = np.random.default_rng(np.random.SeedSequence(entropy=spec.seed, spawn_key=(0, 0)))
    w0 = rng.standard_normal(spec.dimension)
    w0 /= np.linalg.norm(w0)
    if spec.aligned:
        return w0, np.tile(w0, (spec.m, 1))
    directions = rng.standard_normal((spec.m, spec.dimension))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    centers = w0 + spec.sphere_radius_d * directions
    return w0, centers / np.linalg.norm(centers, axis=1, keepdims=True)


def build_synthetic_task(spec: SyntheticTaskSpec, stream_seed_value: Optional[int] = None) -> Task:
    """Build the m synthetic distributions; sample streams default to the task seed."""
    _, w_stars = true_classifiers(spec)
    clean = spec.clean_probs()
    seed = spec.seed if stream_seed_value is None else stream_seed_value

    def factory(index: int, purpose: Purpose) -> SyntheticOracle:
        return SyntheticOracle(w_stars[index], float(clean[index]), stream_seed(seed, index, purpose), index=index)

    logger.info(
        f"Built synthetic task m={spec.m} d={spec.dimension} clean-label probabilities "
        f"{np.round(clean, 4).tolist()}"
    )
    return Task(
        name="synthetic",
        m=spec.m,
        dimension=spec.dimension,
        factory=factory,
        true_models=w_stars,
        clean_probs=clean,
        feature_norm_bound=math.sqrt(spec.dimension) + 3.0,
        feature_second_moment=1.0,
    )
