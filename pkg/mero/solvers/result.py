from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Set

import numpy as np

from ..errors import InvalidArgumentError


@dataclass
class Checkpoint:
    """A solution snapshot handed to the trace recorder."""
    t: int
    w: np.ndarray
    q: np.ndarray
    samples_per_dist: List[int]


CheckpointHook = Callable[[Checkpoint], None]


@dataclass
class SolverResult:
    algorithm: str
    w: np.ndarray
    q: np.ndarray
    rounds: int
    samples_per_dist: List[int]
    # algorithm-specific artifacts: stage-1 solutions, offsets, reference model, weights
    extras: Dict[str, Any] = field(default_factory=dict)


def checkpoint_grid(total: int, every: Optional[int]) -> Set[int]:
    """Rounds at which to record: every k-th round plus the final one."""
    if total < 1:
        raise InvalidArgumentError(f"need at least one round, got {total}")
    if not every:
        return {total}
    if every < 1:
        raise InvalidArgumentError(f"checkpoint_every must be positive, got {every}")
    return set(range(every, total + 1, every)) | {total}
