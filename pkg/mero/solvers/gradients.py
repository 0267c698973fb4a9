"""Stochastic gradients of the saddle objectives Σᵢ qᵢ·pᵢ·[Rᵢ(w) − cᵢ]."""
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import InvalidArgumentError
from ..problems.loss import LogisticLoss, Sample

Batch = Tuple[np.ndarray, np.ndarray]


def _as_batches(samples: Sequence[Union[Sample, Batch]]) -> List[Batch]:
    batches = []
    for item in samples:
        if isinstance(item, Sample):
            batches.append((np.asarray(item.x, dtype=float)[None, :], np.array([item.y], dtype=float)))
        else:
            X, y = item
            batches.append((np.atleast_2d(np.asarray(X, dtype=float)), np.asarray(y, dtype=float).reshape(-1)))
    return batches


def saddle_gradients(
    w: np.ndarray,
    q: np.ndarray,
    samples: Sequence[Union[Sample, Batch]],
    loss: LogisticLoss,
    anchors: Optional[np.ndarray] = None,
    offsets: Optional[np.ndarray] = None,
    p: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Mini-batch gradients in w and q.

    The q-coordinate i is pᵢ·(mean ℓ(w; zᵢ) − mean ℓ(anchorᵢ; zᵢ) − offsetᵢ); missing anchors,
    offsets and weights drop out. ``anchors`` is either one model per distribution or a
    single model shared by all of them.
    """
    q = np.asarray(q, dtype=float)
    m = q.shape[0]
    batches = _as_batches(samples)
    if len(batches) != m:
        raise InvalidArgumentError(f"expected samples for {m} distributions, got {len(batches)}")
    if anchors is not None:
        anchors = np.broadcast_to(np.asarray(anchors, dtype=float), (m, np.shape(w)[0]))
    weights = np.ones(m) if p is None else np.asarray(p, dtype=float)

    g_w = np.zeros(np.shape(w)[0])
    g_q = np.zeros(m)
    for i, (X, y) in enumerate(batches):
        if X.shape[0] == 0:
            raise InvalidArgumentError(f"no sample for distribution {i}")
        g_w += q[i] * weights[i] * loss.mean_gradient(w, X, y)
        value = float(np.mean(loss.values(w, X, y)))
        if anchors is not None:
            value -= float(np.mean(loss.values(anchors[i], X, y)))
        if offsets is not None:
            value -= float(offsets[i])
        g_q[i] = weights[i] * value
    return g_w, g_q


def mero_gradients(
    w: np.ndarray,
    q: np.ndarray,
    samples: Sequence[Union[Sample, Batch]],
    anchors: np.ndarray,
    loss: LogisticLoss,
) -> Tuple[np.ndarray, np.ndarray]:
    """g_w = Σᵢ qᵢ∇ℓ(w; zᵢ) and g_q[i] = ℓ(w; zᵢ) − ℓ(w̄⁽ⁱ⁾; zᵢ)."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    if anchors.shape[0] != np.shape(q)[0]:
        raise InvalidArgumentError(f"expected {np.shape(q)[0]} risk-minimizer solutions, got {anchors.shape[0]}")
    return saddle_gradients(w, q, samples, loss, anchors=anchors)


def weighted_gradients(
    w: np.ndarray,
    q: np.ndarray,
    batches: Sequence[Batch],
    anchors: Optional[np.ndarray],
    p: np.ndarray,
    loss: LogisticLoss,
    batch_sizes: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Weighted mini-batch gradients; ``anchors=None`` gives the weighted GDRO objective."""
    if batch_sizes is not None:
        for i, ((X, _), size) in enumerate(zip(batches, batch_sizes)):
            if np.atleast_2d(X).shape[0] != size:
                raise InvalidArgumentError(
                    f"distribution {i}: expected a batch of {size} samples, got {np.atleast_2d(X).shape[0]}"
                )
    return saddle_gradients(w, q, batches, loss, anchors=anchors, p=p)
