from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class Sample:
    """A single labelled example z = (x, y) with y in {-1, +1}."""
    x: np.ndarray
    y: float


@dataclass(frozen=True)
class LogisticLoss:
    """ℓ(w; x, y) = scale · ln(1 + exp(−y⟨w, x⟩)).

    All methods accept a batch: X of shape (n, d) and y of shape (n,).
    """
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidArgumentError(f"loss scale must be positive, got {self.scale}")

    @staticmethod
    def _margins(w: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if X.shape[1] != np.shape(w)[0]:
            raise InvalidArgumentError(
                f"dimension mismatch: model has {np.shape(w)[0]} entries, features have {X.shape[1]}"
            )
        return np.asarray(y, dtype=float) * (X @ w)

    def values(self, w: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        # softplus(-margin) without overflow
        return self.scale * np.logaddexp(0.0, -self._margins(w, X, y))

    def gradients(self, w: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Per-sample gradients, shape (n, d)."""
        X = np.atleast_2d(X)
        y = np.asarray(y, dtype=float)
        coef = -self.scale * y * expit(-self._margins(w, X, y))
        return coef[:, None] * X

    def mean_gradient(self, w: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        y = np.asarray(y, dtype=float)
        coef = -self.scale * y * expit(-self._margins(w, X, y))
        return coef @ X / X.shape[0]


def logistic_loss(loss: LogisticLoss, w: np.ndarray, z: Sample) -> float:
    return float(loss.values(w, z.x[None, :], np.array([z.y]))[0])


def logistic_grad(loss: LogisticLoss, w: np.ndarray, z: Sample) -> np.ndarray:
    return loss.gradients(w, z.x[None, :], np.array([z.y]))[0]
