from abc import ABC, abstractmethod
from enum import Enum
from typing import Optional, Tuple
import logging

import numpy as np

from ..errors import BudgetExhaustedError, InvalidArgumentError
from .loss import LogisticLoss, Sample

logger = logging.getLogger(__name__)


class OracleKind(str, Enum):
    SYNTHETIC = "synthetic"
    FINITE_SUPPORT = "finite_support"
    EMPIRICAL_WITH_REPLACEMENT = "empirical_with_replacement"
    EMPIRICAL_ONCE_EACH = "empirical_once_each"


class Purpose(str, Enum):
    """What a sample stream is used for. Each (distribution, purpose) pair owns its own stream."""
    STAGE1 = "stage1"
    STAGE2 = "stage2"
    STAGE3 = "stage3"
    SMPA_FIRST = "smpa-first-half"
    SMPA_SECOND = "smpa-second-half"
    PRETRAIN = "pretrain"
    PILOT = "pilot"
    RSTAR_TRAIN = "rstar-train"
    RSTAR_EVAL = "rstar-eval"
    EVALUATION = "evaluation"


# Stable integer codes, part of the replay contract; never renumber.
PURPOSE_CODES = {
    Purpose.STAGE1: 1,
    Purpose.STAGE2: 2,
    Purpose.STAGE3: 3,
    Purpose.SMPA_FIRST: 4,
    Purpose.SMPA_SECOND: 5,
    Purpose.PRETRAIN: 6,
    Purpose.PILOT: 7,
    Purpose.RSTAR_TRAIN: 8,
    Purpose.RSTAR_EVAL: 9,
    Purpose.EVALUATION: 10,
}

TRAINING_PURPOSES = frozenset(
    {Purpose.STAGE1, Purpose.STAGE2, Purpose.STAGE3, Purpose.SMPA_FIRST, Purpose.SMPA_SECOND, Purpose.PRETRAIN}
)


def stream_seed(seed: int, index: int, purpose: Purpose) -> np.random.SeedSequence:
    """Independent seed for the (distribution, purpose) stream of a run."""
    if seed < 0:
        raise InvalidArgumentError(f"seeds must be non-negative, got {seed}")
    return np.random.SeedSequence(entropy=seed, spawn_key=(index, PURPOSE_CODES[Purpose(purpose)]))


class DistributionOracle(ABC):
    """Base class for all sample sources of a single distribution."""

    kind: OracleKind

    def __init__(
        self,
        dimension: int,
        seed: np.random.SeedSequence,
        index: Optional[int] = None,
        budget: Optional[int] = None,
    ):
        self.dimension = dimension
        self.index = index
        self.budget = budget
        self.drawn_count = 0
        self.rng = np.random.default_rng(seed)

    def remaining(self) -> Optional[int]:
        if self.budget is None:
            return None
        return self.budget - self.drawn_count

    def draw(self, n: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """Draw n samples, returning features of shape (n, d) and labels of shape (n,)."""
        if n < 0:
            raise InvalidArgumentError(f"cannot draw a negative number of samples ({n})")
        if self.budget is not None and self.drawn_count + n > self.budget:
            raise BudgetExhaustedError(self.index, self.budget, self.drawn_count + n - self.budget)
        X, y = self._sample(n)
        self.drawn_count += n
        return X, y

    def draw_one(self) -> Sample:
        X, y = self.draw(1)
        return Sample(x=X[0], y=float(y[0]))

    @abstractmethod
    def _sample(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Produce n samples from the underlying distribution."""
        pass

    def exact_risk(self, loss: LogisticLoss, w: np.ndarray) -> float:
        raise InvalidArgumentError(f"exact risk is only available for finite-support oracles, not {self.kind.value}")

    @property
    def supports_exact_risk(self) -> bool:
        return False
