from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
import logging

import numpy as np

from .base_oracle import TRAINING_PURPOSES, DistributionOracle, Purpose
from .loss import LogisticLoss

logger = logging.getLogger(__name__)

OracleFactory = Callable[[int, Purpose], DistributionOracle]


@dataclass
class Task:
    """m distributions with one lazily created oracle per (distribution, purpose).

    When ``shared_training_stream`` is set, every training purpose of a distribution maps to
    the same oracle, so data that may be processed only once is never reused across stages.
    """
    name: str
    m: int
    dimension: int
    factory: OracleFactory
    true_models: Optional[np.ndarray] = None
    clean_probs: Optional[np.ndarray] = None
    shared_training_stream: bool = False
    # known bounds on ‖x‖ and on λ_max(E[xxᵀ]); derive_constants falls back to a pilot without them
    feature_norm_bound: Optional[float] = None
    feature_second_moment: Optional[float] = None
    _oracles: Dict[Tuple[int, Purpose], DistributionOracle] = field(default_factory=dict, repr=False)

    def _key_purpose(self, purpose: Purpose) -> Purpose:
        if self.shared_training_stream and purpose in TRAINING_PURPOSES:
            return Purpose.STAGE1
        return purpose

    def oracle(self, index: int, purpose: Purpose) -> DistributionOracle:
        key = (index, self._key_purpose(Purpose(purpose)))
        if key not in self._oracles:
            self._oracles[key] = self.factory(*key)
        return self._oracles[key]

    def oracles(self, purpose: Purpose) -> List[DistributionOracle]:
        return [self.oracle(i, purpose) for i in range(self.m)]

    def samples_drawn(self) -> List[int]:
        """Training draws per distribution, across all training purposes."""
        counts = [0] * self.m
        for (index, purpose), oracle in self._oracles.items():
            if purpose in TRAINING_PURPOSES:
                counts[index] += oracle.drawn_count
        return counts

    @property
    def evaluation_is_exact(self) -> bool:
        return self.oracle(0, Purpose.EVALUATION).supports_exact_risk

    def exact_risks(self, loss: LogisticLoss, w: np.ndarray) -> np.ndarray:
        return np.array([o.exact_risk(loss, w) for o in self.oracles(Purpose.EVALUATION)])
