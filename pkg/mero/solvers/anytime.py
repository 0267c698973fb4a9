"""Single-loop stochastic mirror descent for MERO, GDRO and reference-model MERO."""
from enum import Enum
from typing import Iterable, Optional, Sequence
import logging

import numpy as np
from tqdm import trange

from ..config.settings import get_settings
from ..errors import ConfigurationError
from ..geometry import Direction, ProductGeometry, mirror_step_primal, mirror_step_simplex
from ..problems.base_oracle import DistributionOracle, Purpose
from ..problems.loss import LogisticLoss
from ..problems.task import Task
from .gradients import saddle_gradients
from .result import Checkpoint, CheckpointHook, SolverResult
from .schedules import StepSchedule
from .smd import smd_risk_step
from .state import AnytimeMeroState, RiskMinimizerState

logger = logging.getLogger(__name__)


class Anchoring(str, Enum):
    """What is subtracted from each loss in the q-gradient."""
    MINIMIZERS = "minimizers"   # running risk-minimizer averages
    REFERENCE = "reference"     # fixed models, shared or one per distribution
    NONE = "none"               # raw losses (GDRO)


def anytime_mero_round(
    state: AnytimeMeroState,
    oracles: Sequence[DistributionOracle],
    loss: LogisticLoss,
    schedule: StepSchedule,
    geom: ProductGeometry,
    reference: Optional[np.ndarray] = None,
    offsets: Optional[np.ndarray] = None,
) -> AnytimeMeroState:
    """One round: a sample per distribution feeds both the risk minimizers and the saddle step.

    Without risk minimizers in ``state`` the q-gradient is anchored at ``reference`` when
    given (one shared model or one per distribution), otherwise it is the raw loss minus
    the optional constant ``offsets``. The state is updated in place and returned.
    """
    t = state.t + 1
    batches = [oracle.draw(1) for oracle in oracles]

    anchors = None
    if state.minimizers:
        for i, (minimizer, (X, y)) in enumerate(zip(state.minimizers, batches)):
            smd_risk_step(minimizer, loss.mean_gradient(minimizer.w, X, y), schedule, geom.primal, i)
        anchors = state.anchors
    elif reference is not None:
        anchors = reference

    g_w, g_q = saddle_gradients(state.w, state.q, batches, loss, anchors=anchors, offsets=offsets)

    eta_w = schedule.primal_step(t)
    state.eta_sum += eta_w
    # η^w and η^q are proportional, so both averages share the η^w weights
    frac = eta_w / state.eta_sum
    state.w_bar = state.w_bar + frac * (state.w - state.w_bar)
    state.q_bar = state.q_bar + frac * (state.q - state.q_bar)

    state.w = mirror_step_primal(geom.primal, state.w, g_w, eta_w)
    if geom.simplex.m > 1:
        state.q = mirror_step_simplex(geom.simplex, state.q, g_q, schedule.simplex_step(t), Direction.ASCENT)
    state.samples_used += 1
    state.t = t
    return state


def run_saddle_rounds(
    algorithm: str,
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    iters: int,
    anchoring: Anchoring,
    reference: Optional[np.ndarray] = None,
    offsets: Optional[np.ndarray] = None,
    checkpoints: Optional[Iterable[int]] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
    purpose: Purpose = Purpose.STAGE1,
) -> SolverResult:
    """Drive ``anytime_mero_round`` for ``iters`` rounds, reporting the running averages at checkpoints."""
    if iters < 1:
        raise ConfigurationError(f"iters must be at least 1, got {iters}")
    state = AnytimeMeroState.start(geom, with_minimizers=anchoring is Anchoring.MINIMIZERS)
    oracles = task.oracles(purpose)
    marks = set(checkpoints or ())
    logger.info(f"Running {algorithm} for {iters} rounds on {task.m} distributions")

    for _ in trange(iters, desc=algorithm, disable=not get_settings().show_progress):
        anytime_mero_round(state, oracles, loss, schedule, geom, reference=reference, offsets=offsets)
        if on_checkpoint is not None and state.t in marks:
            on_checkpoint(Checkpoint(state.t, state.w_bar.copy(), state.q_bar.copy(), task.samples_drawn()))

    extras = {}
    if state.minimizers:
        extras["risk_minimizers"] = state.anchors
    return SolverResult(
        algorithm=algorithm,
        w=state.w_bar,
        q=state.q_bar,
        rounds=state.t,
        samples_per_dist=task.samples_drawn(),
        extras=extras,
    )


def run_anytime_mero(
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    iters: int,
    checkpoints: Optional[Iterable[int]] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
    algorithm: str = "mero-anytime",
) -> SolverResult:
    return run_saddle_rounds(
        algorithm, task, loss, geom, schedule, iters, Anchoring.MINIMIZERS,
        checkpoints=checkpoints, on_checkpoint=on_checkpoint,
    )


def run_gdro_smd(
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    iters: int,
    checkpoints: Optional[Iterable[int]] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
) -> SolverResult:
    return run_saddle_rounds(
        "gdro", task, loss, geom, schedule, iters, Anchoring.NONE,
        checkpoints=checkpoints, on_checkpoint=on_checkpoint,
    )


def pretrain_average_risk(
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    iters: int,
) -> np.ndarray:
    """SMD on the average risk (1/m)·Σᵢ Rᵢ, drawing one sample per distribution per round."""
    if iters < 1:
        raise ConfigurationError(f"pretrain budget must be at least 1, got {iters}")
    oracles = task.oracles(Purpose.PRETRAIN)
    state = RiskMinimizerState.start(geom.primal)
    for _ in trange(iters, desc="pretrain", disable=not get_settings().show_progress, leave=False):
        batches = [oracle.draw(1) for oracle in oracles]
        grad = np.mean([loss.mean_gradient(state.w, X, y) for X, y in batches], axis=0)
        smd_risk_step(state, grad, schedule, geom.primal)
    logger.info(f"Pretrained reference model for {iters} rounds ({iters * task.m} samples)")
    return state.w_bar


def run_reference_mero(
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    iters: int,
    reference: Optional[np.ndarray] = None,
    pretrain_iters: Optional[int] = None,
    checkpoints: Optional[Iterable[int]] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
) -> SolverResult:
    """Anytime MERO with every loss compared against a single reference model w_r."""
    if reference is None:
        if not pretrain_iters:
            raise ConfigurationError("reference MERO needs a reference model or a pretrain budget")
        reference = pretrain_average_risk(task, loss, geom, schedule, pretrain_iters)
    else:
        reference = geom.primal.check(reference)
    result = run_saddle_rounds(
        "mero-reference", task, loss, geom, schedule, iters, Anchoring.REFERENCE,
        reference=reference, checkpoints=checkpoints, on_checkpoint=on_checkpoint,
    )
    result.extras["reference_model"] = reference
    return result
