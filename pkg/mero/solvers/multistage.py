from typing import Iterable, Optional
import logging

import numpy as np

from ..errors import ConfigurationError
from ..geometry import ProductGeometry
from ..problems.base_oracle import Purpose
from ..problems.loss import LogisticLoss
from ..problems.task import Task
from .anytime import Anchoring, run_saddle_rounds
from .result import CheckpointHook, SolverResult
from .schedules import StepSchedule
from .smd import run_risk_minimizer

logger = logging.getLogger(__name__)


def run_multistage_mero(
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    iters: int,
    include_stage2: bool = True,
    continue_past_t: bool = False,
    horizon_multiple: int = 3,
    checkpoints: Optional[Iterable[int]] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
) -> SolverResult:
    """Three stages of T rounds each: minimize every risk, estimate the minimal risks, then
    run SMD on the saddle problem with those estimates as constant offsets.

    Without stage 2 the saddle stage compares losses against the stage-1 models directly.
    With ``continue_past_t`` the last stage runs ``horizon_multiple``·T rounds at the step
    sizes designed for T. Checkpoint rounds count stage-3 rounds only.
    """
    if iters < 1:
        raise ConfigurationError(f"iters must be at least 1, got {iters}")
    if continue_past_t and horizon_multiple < 1:
        raise ConfigurationError(f"horizon_multiple must be at least 1, got {horizon_multiple}")

    logger.info(f"Stage 1: {task.m} risk minimizers, {iters} rounds each")
    stage1 = np.stack([
        run_risk_minimizer(
            task.oracle(i, Purpose.STAGE1), loss, schedule, geom.primal, iters,
            index=i, plain_average=True, desc=f"stage1[{i}]",
        ).w_bar
        for i in range(task.m)
    ])

    offsets = None
    if include_stage2:
        logger.info(f"Stage 2: estimating minimal risks from {iters} fresh samples each")
        offsets = np.empty(task.m)
        for i in range(task.m):
            X, y = task.oracle(i, Purpose.STAGE2).draw(iters)
            offsets[i] = float(np.mean(loss.values(stage1[i], X, y)))

    stage3_iters = iters * horizon_multiple if continue_past_t else iters
    logger.info(f"Stage 3: saddle-point SMD for {stage3_iters} rounds")
    result = run_saddle_rounds(
        "mero-multistage", task, loss, geom, schedule, stage3_iters,
        Anchoring.NONE if include_stage2 else Anchoring.REFERENCE,
        reference=None if include_stage2 else stage1,
        offsets=offsets,
        checkpoints=checkpoints,
        on_checkpoint=on_checkpoint,
        purpose=Purpose.STAGE3,
    )
    result.extras["stage1_solutions"] = stage1
    if offsets is not None:
        result.extras["offsets"] = offsets
    return result
