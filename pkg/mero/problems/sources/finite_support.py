from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union
import logging

import numpy as np

from ...errors import InvalidArgumentError
from ..base_oracle import DistributionOracle, OracleKind, Purpose, stream_seed
from ..loss import LogisticLoss
from ..task import Task

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiniteSupportDistribution:
    """A distribution over finitely many labelled atoms."""
    atoms: np.ndarray   # (k, d)
    labels: np.ndarray  # (k,)
    probs: np.ndarray   # (k,)

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        labels = np.asarray(self.labels, dtype=float).reshape(-1)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if not (atoms.shape[0] == labels.shape[0] == probs.shape[0]) or atoms.shape[0] == 0:
            raise InvalidArgumentError(
                f"atoms, labels and probabilities disagree: {atoms.shape}, {labels.shape}, {probs.shape}"
            )
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError(f"atom probabilities must be non-negative and sum to 1, got sum {probs.sum()}")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise InvalidArgumentError("labels must be -1 or +1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs / probs.sum())

    @property
    def dimension(self) -> int:
        return self.atoms.shape[1]

    def risk(self, loss: LogisticLoss, w: np.ndarray) -> float:
        return float(self.probs @ loss.values(w, self.atoms, self.labels))


class FiniteSupportOracle(DistributionOracle):
    """Draws atoms i.i.d. according to their probabilities; risks are exact sums."""

    kind = OracleKind.FINITE_SUPPORT

    def __init__(self, distribution: FiniteSupportDistribution, seed, index=None, budget=None):
        super().__init__(dimension=distribution.dimension, seed=seed, index=index, budget=budget)
        self.distribution = distribution

    def _sample(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        idx = self.rng.choice(self.distribution.probs.shape[0], size=n, p=self.distribution.probs)
        return self.distribution.atoms[idx], self.distribution.labels[idx]

    def exact_risk(self, loss: LogisticLoss, w: np.ndarray) -> float:
        return self.distribution.risk(loss, w)

    @property
    def supports_exact_risk(self) -> bool:
        return True


def exact_risk(oracle: DistributionOracle, loss: LogisticLoss, w: np.ndarray) -> float:
    """Σₖ probₖ·ℓ(w; atomₖ) for a finite-support oracle."""
    if oracle.kind is not OracleKind.FINITE_SUPPORT:
        raise InvalidArgumentError(f"exact risk needs a finite-support oracle, got {oracle.kind.value}")
    return oracle.exact_risk(loss, w)


def read_finite_support(path: Union[str, Path]) -> FiniteSupportDistribution:
    """Read one `prob,label,x1,...,xd` line per atom."""
    table = np.loadtxt(path, delimiter=",", ndmin=2, comments="#", encoding="utf-8")
    if table.shape[1] < 3:
        raise InvalidArgumentError(f"{path}: expected at least prob,label,x1 per line")
    return FiniteSupportDistribution(atoms=table[:, 2:], labels=table[:, 1], probs=table[:, 0])


def write_finite_support(path: Union[str, Path], distribution: FiniteSupportDistribution) -> None:
    lines = []
    for prob, label, atom in zip(distribution.probs, distribution.labels, distribution.atoms):
        fields = [repr(float(prob)), str(int(label))] + [repr(float(v)) for v in atom]
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_finite_task(
    distributions: Sequence[FiniteSupportDistribution], seed: int = 0, name: str = "finite"
) -> Task:
    dims = {d.dimension for d in distributions}
    if len(dims) != 1:
        raise InvalidArgumentError(f"all distributions must share one dimension, got {sorted(dims)}")
    distributions = list(distributions)

    def factory(index: int, purpose: Purpose) -> FiniteSupportOracle:
        return FiniteSupportOracle(distributions[index], stream_seed(seed, index, purpose), index=index)

    return Task(name=name, m=len(distributions), dimension=dims.pop(), factory=factory)


def load_finite_task(directory: Union[str, Path], seed: int = 0) -> Task:
    """Every *.csv file of the directory is one distribution, ordered by file name."""
    files: List[Path] = sorted(Path(directory).glob("*.csv"))
    if not files:
        raise InvalidArgumentError(f"no finite-support files (*.csv) found in {directory}")
    logger.info(f"Loading {len(files)} finite-support distributions from {directory}")
    return build_finite_task([read_finite_support(f) for f in files], seed=seed, name="finite")
