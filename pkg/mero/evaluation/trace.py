"""Checkpoint metrics and their CSV form."""
from pathlib import Path
from typing import List, Optional, Sequence, Union
import logging
import time

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..errors import InvalidArgumentError
from ..problems.base_oracle import Purpose
from ..problems.loss import LogisticLoss
from ..problems.task import Task
from ..solvers.result import Checkpoint
from .metrics import mer, mwer
from .risk import MinimalRiskEstimate, estimate_risk

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"


class TraceRecord(BaseModel):
    """Metrics of one solution snapshot."""
    run_id: str
    algo: str
    seed: int
    t: int
    samples_total: int
    samples_per_dist: List[int]
    risks: List[float]
    excess: List[float]
    mer: float
    mwer: float
    q: List[float]
    wall_ms: float = 0.0


def trace_columns(m: int) -> List[str]:
    return (
        ["run_id", "algo", "seed", "t", "samples_total", "samples_per_dist"]
        + [f"risk_{i}" for i in range(1, m + 1)]
        + [f"excess_{i}" for i in range(1, m + 1)]
        + ["mer", "mwer"]
        + [f"q_{i}" for i in range(1, m + 1)]
        + ["wall_ms"]
    )


class TraceRecorder:
    """Evaluates every checkpoint it is called with and keeps the records.

    Risks are exact when the evaluation oracles have finite support, otherwise Monte Carlo
    estimates over ``n_eval`` draws from the evaluation streams.
    """

    def __init__(
        self,
        task: Task,
        loss: LogisticLoss,
        rstar: MinimalRiskEstimate,
        run_id: str,
        algo: str,
        seed: int,
        p: Optional[Sequence[float]] = None,
        n_eval: int = 10_000,
        record_wall_clock: bool = True,
    ):
        if len(rstar.values) != task.m:
            raise InvalidArgumentError(f"{len(rstar.values)} minimal risks for {task.m} distributions")
        self.task = task
        self.loss = loss
        self.rstar = rstar
        self.run_id = run_id
        self.algo = algo
        self.seed = seed
        self.p = np.ones(task.m) if p is None else np.asarray(p, dtype=float)
        self.n_eval = n_eval
        self.record_wall_clock = record_wall_clock
        self.records: List[TraceRecord] = []
        self._started = time.perf_counter()

    def risks(self, w: np.ndarray) -> np.ndarray:
        if self.task.evaluation_is_exact:
            return self.task.exact_risks(self.loss, w)
        return np.array([
            estimate_risk(oracle, self.loss, w, self.n_eval)[0]
            for oracle in self.task.oracles(Purpose.EVALUATION)
        ])

    def __call__(self, checkpoint: Checkpoint) -> TraceRecord:
        risks = self.risks(checkpoint.w)
        excess = risks - self.rstar.values
        record = TraceRecord(
            run_id=self.run_id,
            algo=self.algo,
            seed=self.seed,
            t=checkpoint.t,
            samples_total=int(sum(checkpoint.samples_per_dist)),
            samples_per_dist=[int(n) for n in checkpoint.samples_per_dist],
            risks=risks.tolist(),
            excess=excess.tolist(),
            mer=mer(excess)[0],
            mwer=mwer(excess, self.p)[0],
            q=np.asarray(checkpoint.q, dtype=float).tolist(),
            wall_ms=(time.perf_counter() - self._started) * 1000.0 if self.record_wall_clock else 0.0,
        )
        self.records.append(record)
        logger.debug(f"{self.algo} t={record.t}: MER={record.mer:.6g}")
        return record


def records_to_frame(records: Sequence[TraceRecord]) -> pd.DataFrame:
    if not records:
        raise InvalidArgumentError("no trace records to write")
    m = len(records[0].risks)
    rows = []
    for r in records:
        rows.append(
            [r.run_id, r.algo, r.seed, r.t, r.samples_total, ";".join(str(n) for n in r.samples_per_dist)]
            + r.risks + r.excess + [r.mer, r.mwer] + r.q + [r.wall_ms]
        )
    return pd.DataFrame(rows, columns=trace_columns(m))


def write_trace_csv(path: Union[str, Path], records: Sequence[TraceRecord]) -> None:
    records_to_frame(records).to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
    logger.info(f"Wrote {len(records)} trace rows to {path}")


def read_trace_csv(path: Union[str, Path]) -> pd.DataFrame:
    frame = pd.read_csv(path, encoding="utf-8", dtype={"samples_per_dist": str, "run_id": str})
    for column in ("run_id", "algo", "t", "mer", "mwer"):
        if column not in frame.columns:
            raise InvalidArgumentError(f"{path}: not a trace file (missing column {column!r})")
    return frame


def trace_m(frame: pd.DataFrame) -> int:
    """Number of distributions in a trace table."""
    return sum(1 for c in frame.columns if c.startswith("risk_"))
