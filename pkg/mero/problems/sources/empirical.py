from enum import Enum
from typing import Tuple

import numpy as np

from ...errors import InvalidArgumentError
from ..base_oracle import DistributionOracle, OracleKind


class SamplingMode(str, Enum):
    WITH_REPLACEMENT = "with_replacement"
    ONCE_EACH = "once_each"


class EmpiricalOracle(DistributionOracle):
    """Samples rows of a fixed data set, either i.i.d. uniformly or each row exactly once."""

    def __init__(self, X: np.ndarray, y: np.ndarray, mode: SamplingMode, seed, index=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] == 0:
            raise InvalidArgumentError("cannot sample from an empty group")
        self.mode = SamplingMode(mode)
        budget = X.shape[0] if self.mode is SamplingMode.ONCE_EACH else None
        super().__init__(dimension=X.shape[1], seed=seed, index=index, budget=budget)
        self.X = X
        self.y = np.asarray(y, dtype=float)
        self.kind = (
            OracleKind.EMPIRICAL_ONCE_EACH if self.mode is SamplingMode.ONCE_EACH
            else OracleKind.EMPIRICAL_WITH_REPLACEMENT
        )
        self._order = self.rng.permutation(X.shape[0]) if self.mode is SamplingMode.ONCE_EACH else None

    def _sample(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        if self._order is not None:
            # drawn_count is advanced by draw() after this returns
            idx = self._order[self.drawn_count:self.drawn_count + n]
        else:
            idx = self.rng.integers(0, self.X.shape[0], size=n)
        return self.X[idx], self.y[idx]
