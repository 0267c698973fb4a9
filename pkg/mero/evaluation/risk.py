"""Risk estimates and the minimal-risk protocols."""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from ..errors import InvalidArgumentError, NumericError
from ..geometry import PrimalGeometry
from ..problems.base_oracle import DistributionOracle, Purpose
from ..problems.loss import LogisticLoss
from ..problems.sources.finite_support import FiniteSupportDistribution
from ..problems.task import Task
from ..solvers.schedules import StepSchedule
from ..solvers.smd import run_risk_minimizer

logger = logging.getLogger(__name__)

EVAL_CHUNK = 10_000


class MinimalRiskMethod(str, Enum):
    EXACT = "exact"
    ERM_PROTOCOL = "erm_protocol"
    FILE = "file"


@dataclass
class MinimalRiskEstimate:
    """R̂ᵢ* per distribution and how it was obtained."""
    values: np.ndarray
    method: MinimalRiskMethod
    se: Optional[np.ndarray] = None
    erm_train_samples: int = 0
    erm_eval_samples: int = 0
    seed: Optional[int] = None
    minimizers: List[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.se is None:
            self.se = np.zeros_like(self.values)


def estimate_risk(oracle: DistributionOracle, loss: LogisticLoss, w: np.ndarray, n_eval: int) -> Tuple[float, float]:
    """Monte Carlo mean of ℓ(w; ·) over n_eval fresh draws, and its standard error."""
    if n_eval < 1:
        raise InvalidArgumentError(f"n_eval must be at least 1, got {n_eval}")
    count, mean, m2 = 0, 0.0, 0.0
    remaining = n_eval
    while remaining:
        size = min(EVAL_CHUNK, remaining)
        X, y = oracle.draw(size)
        values = loss.values(w, X, y)
        chunk_mean = float(values.mean())
        chunk_m2 = float(np.sum((values - chunk_mean) ** 2))
        # pairwise merge of running moments
        delta = chunk_mean - mean
        total = count + size
        mean += delta * size / total
        m2 += chunk_m2 + delta ** 2 * count * size / total
        count = total
        remaining -= size
    if not math.isfinite(mean):
        raise NumericError("risk estimate is not finite")
    se = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
    return mean, se


def _minimal_risk_with_se(
    train_oracle: DistributionOracle,
    eval_oracle: DistributionOracle,
    loss: LogisticLoss,
    geom: PrimalGeometry,
    big_g: float,
    train_n: int,
    eval_n: int,
    index: int = 0,
) -> Tuple[float, float, np.ndarray]:
    if train_n < 1 or eval_n < 1:
        raise InvalidArgumentError(f"train_n and eval_n must be at least 1, got {train_n}, {eval_n}")
    schedule = StepSchedule.single_risk(geom.d_bound, big_g)
    state = run_risk_minimizer(train_oracle, loss, schedule, geom, train_n, desc=f"rstar[{index}]")
    mean, se = estimate_risk(eval_oracle, loss, state.w_bar, eval_n)
    return mean, se, state.w_bar


def estimate_minimal_risk(
    train_oracle: DistributionOracle,
    eval_oracle: DistributionOracle,
    loss: LogisticLoss,
    geom: PrimalGeometry,
    big_g: float,
    train_n: int,
    eval_n: int,
) -> float:
    """Train SMD on train_n samples, then measure the average iterate on eval_n fresh samples."""
    return _minimal_risk_with_se(train_oracle, eval_oracle, loss, geom, big_g, train_n, eval_n)[0]


def erm_minimal_risks(
    task: Task,
    loss: LogisticLoss,
    geom: PrimalGeometry,
    big_g: float,
    train_n: int,
    eval_n: int,
    seed: Optional[int] = None,
) -> MinimalRiskEstimate:
    values, errors, models = [], [], []
    for i in range(task.m):
        mean, se, w = _minimal_risk_with_se(
            task.oracle(i, Purpose.RSTAR_TRAIN), task.oracle(i, Purpose.RSTAR_EVAL),
            loss, geom, big_g, train_n, eval_n, index=i,
        )
        logger.info(f"Distribution {i}: R*≈{mean:.6f} (se {se:.2g})")
        values.append(mean)
        errors.append(se)
        models.append(w)
    return MinimalRiskEstimate(
        values=np.array(values),
        se=np.array(errors),
        method=MinimalRiskMethod.ERM_PROTOCOL,
        erm_train_samples=train_n,
        erm_eval_samples=eval_n,
        seed=seed,
        minimizers=models,
    )


def exact_minimal_risk(
    distribution: FiniteSupportDistribution, loss: LogisticLoss, geom: PrimalGeometry
) -> Tuple[float, np.ndarray]:
    """min over the ball of the exact finite-support risk, by SLSQP with the norm constraint."""
    X, y, probs = distribution.atoms, distribution.labels, distribution.probs
    if X.shape[1] != geom.dimension:
        raise InvalidArgumentError(f"distribution has dimension {X.shape[1]}, geometry {geom.dimension}")

    def objective(w):
        return float(probs @ loss.values(w, X, y)), probs @ loss.gradients(w, X, y)

    solution = minimize(
        objective,
        geom.origin(),
        jac=True,
        method="SLSQP",
        constraints=[{
            "type": "ineq",
            "fun": lambda w: geom.radius ** 2 - float(w @ w),
            "jac": lambda w: -2.0 * w,
        }],
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    w = geom.project(np.asarray(solution.x, dtype=float))
    if not solution.success:
        logger.warning(f"Minimal-risk solver stopped early: {solution.message}")
    return distribution.risk(loss, w), w


def exact_minimal_risks(task: Task, loss: LogisticLoss, geom: PrimalGeometry) -> MinimalRiskEstimate:
    oracles = task.oracles(Purpose.EVALUATION)
    if not all(o.supports_exact_risk for o in oracles):
        raise InvalidArgumentError("exact minimal risks need finite-support evaluation oracles")
    results = [exact_minimal_risk(o.distribution, loss, geom) for o in oracles]
    return MinimalRiskEstimate(
        values=np.array([value for value, _ in results]),
        method=MinimalRiskMethod.EXACT,
        minimizers=[w for _, w in results],
    )


RSTAR_COLUMNS = ["dist", "rstar_hat", "se", "method", "train_n", "eval_n", "seed"]


def write_rstar_file(path: Union[str, Path], estimate: MinimalRiskEstimate) -> None:
    frame = pd.DataFrame({
        "dist": np.arange(1, len(estimate.values) + 1),
        "rstar_hat": estimate.values,
        "se": estimate.se,
        "method": estimate.method.value,
        "train_n": estimate.erm_train_samples,
        "eval_n": estimate.erm_eval_samples,
        "seed": "" if estimate.seed is None else estimate.seed,
    })
    frame.to_csv(path, index=False, float_format="%.17g", encoding="utf-8")
    logger.info(f"Wrote minimal-risk estimates to {path}")


def read_rstar_file(path: Union[str, Path], m: int) -> MinimalRiskEstimate:
    frame = pd.read_csv(path, encoding="utf-8")
    missing = set(RSTAR_COLUMNS) - set(frame.columns)
    if missing:
        raise InvalidArgumentError(f"{path}: missing columns {sorted(missing)}")
    if len(frame) != m:
        raise InvalidArgumentError(f"{path}: expected {m} distributions, found {len(frame)}")
    frame = frame.sort_values("dist")
    return MinimalRiskEstimate(
        values=frame["rstar_hat"].to_numpy(dtype=float),
        se=frame["se"].to_numpy(dtype=float),
        method=MinimalRiskMethod.FILE,
        erm_train_samples=int(frame["train_n"].iloc[0]),
        erm_eval_samples=int(frame["eval_n"].iloc[0]),
    )
