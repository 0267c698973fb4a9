"""Budget-weighted MERO: per-distribution SMD followed by stochastic mirror-prox."""
from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
from tqdm import trange

from ..config.settings import get_settings
from ..errors import ConfigurationError, InvalidArgumentError
from ..geometry import Direction, ProductGeometry, mirror_step_primal, mirror_step_simplex
from ..problems.base_oracle import Purpose
from ..problems.loss import LogisticLoss
from ..problems.task import Task
from .gradients import weighted_gradients
from .result import Checkpoint, CheckpointHook, SolverResult
from .schedules import StepSchedule
from .smd import run_risk_minimizer
from .state import TwoStageState

logger = logging.getLogger(__name__)

# (w, q, half) -> (g_w, g_q); half is SMPA_FIRST for the extrapolation step and SMPA_SECOND for the update
GradientOracle = Callable[[np.ndarray, np.ndarray, Purpose], Tuple[np.ndarray, np.ndarray]]

MIN_BUDGET = 8


def weights_from_budgets(budgets: Sequence[int]) -> np.ndarray:
    """pᵢ = (1/√n_m + 1)/(1/√n_m + √(n_m/nᵢ)) with n_m the smallest budget."""
    if len(budgets) == 0:
        raise InvalidArgumentError("need at least one budget")
    n = np.asarray(budgets, dtype=float)
    if np.any(n < 1):
        raise InvalidArgumentError(f"budgets must be at least 1, got {list(budgets)}")
    if np.any(np.diff(n) > 0):
        logger.warning(f"Budgets {list(budgets)} are not sorted non-increasing; using the smallest as n_m")
    inv_root = 1.0 / np.sqrt(n.min())
    return (inv_root + 1.0) / (inv_root + np.sqrt(n.min() / n))


def smpa_rounds(budgets: Sequence[int], with_stage1: bool = True) -> int:
    """⌊n_m/4⌋ rounds after a stage 1 that spends half of every budget, ⌊n_m/2⌋ without one."""
    return min(budgets) // (4 if with_stage1 else 2)


def _prox(geom: ProductGeometry, w, q, g_w, g_q, eta_w: float, eta_q: float):
    w_next = mirror_step_primal(geom.primal, w, g_w, eta_w)
    if geom.simplex.m == 1:
        return w_next, np.ones(1)
    return w_next, mirror_step_simplex(geom.simplex, q, g_q, eta_q, Direction.ASCENT)


def smpa_round(
    state: TwoStageState,
    gradient_oracle: GradientOracle,
    schedule: StepSchedule,
    geom: ProductGeometry,
) -> TwoStageState:
    """One mirror-prox round; both prox steps start from the anchor (w', q')."""
    t = state.round + 1
    eta_w, eta_q = schedule.primal_step(t), schedule.simplex_step(t)

    g_w, g_q = gradient_oracle(state.w_prime, state.q_prime, Purpose.SMPA_FIRST)
    w_next, q_next = _prox(geom, state.w_prime, state.q_prime, g_w, g_q, eta_w, eta_q)

    g_w, g_q = gradient_oracle(w_next, q_next, Purpose.SMPA_SECOND)
    state.w_prime, state.q_prime = _prox(geom, state.w_prime, state.q_prime, g_w, g_q, eta_w, eta_q)

    state.w, state.q = w_next, q_next
    state.w_sum = state.w_sum + w_next
    state.q_sum = state.q_sum + q_next
    state.round = t
    return state


def batch_gradient_oracle(
    task: Task,
    loss: LogisticLoss,
    batch_sizes: Sequence[int],
    p: np.ndarray,
    anchors: Optional[np.ndarray],
) -> GradientOracle:
    """Draw a fresh mini-batch per distribution from the stream of the requested half-step."""

    def oracle(w: np.ndarray, q: np.ndarray, half: Purpose):
        batches = [task.oracle(i, half).draw(size) for i, size in enumerate(batch_sizes)]
        return weighted_gradients(w, q, batches, anchors, p, loss, batch_sizes=batch_sizes)

    return oracle


def _check_budgets(task: Task, budgets: Sequence[int], minimum: int) -> List[int]:
    budgets = [int(n) for n in budgets]
    if len(budgets) != task.m:
        raise ConfigurationError(f"expected {task.m} budgets, got {len(budgets)}")
    if min(budgets) < minimum:
        raise ConfigurationError(f"every budget must be at least {minimum}, got {budgets}")
    return budgets


def _run_smpa(
    algorithm: str,
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    budgets: List[int],
    rounds: int,
    stage1: Optional[np.ndarray],
    p: np.ndarray,
    checkpoints: Optional[Iterable[int]],
    on_checkpoint: Optional[CheckpointHook],
    spent: Sequence[int],
) -> SolverResult:
    n_min = min(budgets)
    batch_sizes = [n // n_min for n in budgets]
    for i, (n, size) in enumerate(zip(budgets, batch_sizes)):
        unused = n - spent[i] - 2 * rounds * size
        if unused > 0:
            logger.warning(f"Distribution {i}: {unused} of {n} budgeted samples are left unused")

    state = TwoStageState.start(geom, stage1, p)
    oracle = batch_gradient_oracle(task, loss, batch_sizes, p, stage1)
    marks = set(checkpoints or ())
    logger.info(f"Running {rounds} mirror-prox rounds with batch sizes {batch_sizes}")
    for _ in trange(rounds, desc=algorithm, disable=not get_settings().show_progress):
        smpa_round(state, oracle, schedule, geom)
        if on_checkpoint is not None and state.round in marks:
            on_checkpoint(Checkpoint(state.round, state.w_bar, state.q_bar, task.samples_drawn()))

    extras = {"p": p, "batch_sizes": batch_sizes}
    if stage1 is not None:
        extras["stage1_solutions"] = stage1
    return SolverResult(
        algorithm=algorithm,
        w=state.w_bar,
        q=state.q_bar,
        rounds=state.round,
        samples_per_dist=task.samples_drawn(),
        extras=extras,
    )


def run_two_stage_weighted_mero(
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    budgets: Sequence[int],
    p: Optional[np.ndarray] = None,
    checkpoints: Optional[Iterable[int]] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
) -> SolverResult:
    """Half of every budget trains that distribution's risk minimizer; the other half feeds
    ⌊n_m/4⌋ mirror-prox rounds with two batches of ⌊nᵢ/n_m⌋ samples each.

    Each risk minimizer returns the plain mean of its post-step iterates w_2..w_{⌊nᵢ/2⌋+1}.
    """
    budgets = _check_budgets(task, budgets, MIN_BUDGET)
    p = weights_from_budgets(budgets) if p is None else np.asarray(p, dtype=float)

    logger.info(f"Stage 1: risk minimizers with budgets {[n // 2 for n in budgets]}")
    stage1 = np.stack([
        run_risk_minimizer(
            task.oracle(i, Purpose.STAGE1), loss, schedule, geom.primal, n // 2,
            index=i, plain_average=True, average_after_step=True, desc=f"stage1[{i}]",
        ).w_bar
        for i, n in enumerate(budgets)
    ])
    return _run_smpa(
        "mero-weighted", task, loss, geom, schedule, budgets, smpa_rounds(budgets), stage1, p,
        checkpoints, on_checkpoint, spent=[n // 2 for n in budgets],
    )


def run_weighted_gdro(
    task: Task,
    loss: LogisticLoss,
    geom: ProductGeometry,
    schedule: StepSchedule,
    budgets: Sequence[int],
    p: Optional[np.ndarray] = None,
    checkpoints: Optional[Iterable[int]] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
) -> SolverResult:
    """Mirror-prox on Σᵢ qᵢpᵢRᵢ(w); with no stage 1 the whole budget goes to ⌊n_m/2⌋ rounds."""
    budgets = _check_budgets(task, budgets, 2)
    p = weights_from_budgets(budgets) if p is None else np.asarray(p, dtype=float)
    return _run_smpa(
        "gdro-weighted", task, loss, geom, schedule, budgets, smpa_rounds(budgets, with_stage1=False), None, p,
        checkpoints, on_checkpoint, spent=[0] * len(budgets),
    )
