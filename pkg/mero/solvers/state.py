from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..geometry import PrimalGeometry, ProductGeometry


@dataclass
class RiskMinimizerState:
    """One SMD instance minimizing a single risk, with its step-weighted iterate average."""
    w: np.ndarray
    w_bar: np.ndarray
    eta_sum: float = 0.0
    t: int = 0

    @classmethod
    def start(cls, geom: PrimalGeometry) -> "RiskMinimizerState":
        return cls(w=geom.origin(), w_bar=geom.origin())


@dataclass
class AnytimeMeroState:
    minimizers: List[RiskMinimizerState]
    w: np.ndarray
    q: np.ndarray
    w_bar: np.ndarray
    q_bar: np.ndarray
    eta_sum: float = 0.0
    t: int = 0
    samples_used: np.ndarray = field(default=None)

    @classmethod
    def start(cls, geom: ProductGeometry, with_minimizers: bool = True) -> "AnytimeMeroState":
        m = geom.simplex.m
        return cls(
            minimizers=[RiskMinimizerState.start(geom.primal) for _ in range(m)] if with_minimizers else [],
            w=geom.primal.origin(),
            q=geom.simplex.center(),
            w_bar=geom.primal.origin(),
            q_bar=geom.simplex.center(),
            samples_used=np.zeros(m, dtype=np.int64),
        )

    @property
    def anchors(self) -> np.ndarray:
        """Current risk-minimizer averages w̄_t^(i), one row per distribution."""
        return np.stack([r.w_bar for r in self.minimizers])


@dataclass
class TwoStageState:
    """Mirror-prox state: the anchor point (w', q'), the extrapolated point (w, q) and its running sums."""
    stage1_solutions: Optional[np.ndarray]
    p: np.ndarray
    w_prime: np.ndarray
    q_prime: np.ndarray
    w: np.ndarray
    q: np.ndarray
    w_sum: np.ndarray
    q_sum: np.ndarray
    round: int = 0

    @classmethod
    def start(cls, geom: ProductGeometry, stage1_solutions: Optional[np.ndarray], p: np.ndarray) -> "TwoStageState":
        return cls(
            stage1_solutions=None if stage1_solutions is None else np.asarray(stage1_solutions, dtype=float),
            p=np.asarray(p, dtype=float),
            w_prime=geom.primal.origin(),
            q_prime=geom.simplex.center(),
            w=geom.primal.origin(),
            q=geom.simplex.center(),
            w_sum=geom.primal.origin(),
            q_sum=np.zeros(geom.simplex.m),
        )

    @property
    def w_bar(self) -> np.ndarray:
        return self.w_sum / max(self.round, 1)

    @property
    def q_bar(self) -> np.ndarray:
        if self.round == 0:
            return self.q_prime.copy()
        return self.q_sum / self.round
