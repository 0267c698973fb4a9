from typing import Optional
import logging

import numpy as np
from tqdm import trange

from ..config.settings import get_settings
from ..geometry import PrimalGeometry, mirror_step_primal
from ..problems.base_oracle import DistributionOracle
from ..problems.loss import LogisticLoss
from .schedules import StepSchedule
from .state import RiskMinimizerState

logger = logging.getLogger(__name__)


def smd_risk_step(
    state: RiskMinimizerState,
    grad: np.ndarray,
    schedule: StepSchedule,
    geom: PrimalGeometry,
    index: int = 0,
) -> RiskMinimizerState:
    """Fold the current iterate into the weighted average, then take one projected step.

    The state is updated in place and returned.
    """
    t = state.t + 1
    eta = schedule.risk_step(index, t)
    state.eta_sum += eta
    state.w_bar = state.w_bar + (eta / state.eta_sum) * (state.w - state.w_bar)
    state.w = mirror_step_primal(geom, state.w, grad, eta)
    state.t = t
    return state


def run_risk_minimizer(
    oracle: DistributionOracle,
    loss: LogisticLoss,
    schedule: StepSchedule,
    geom: PrimalGeometry,
    iters: int,
    index: int = 0,
    plain_average: bool = False,
    average_after_step: bool = False,
    desc: Optional[str] = None,
) -> RiskMinimizerState:
    """Run SMD on one distribution for ``iters`` single-sample rounds.

    With ``plain_average`` the returned ``w_bar`` is the unweighted mean of w_1..w_T, the
    iterates each gradient was taken at. ``average_after_step`` shifts that window to the
    post-step iterates w_2..w_{T+1}, so the start point is left out.
    """
    state = RiskMinimizerState.start(geom)
    total = geom.origin()
    show = get_settings().show_progress
    for _ in trange(iters, desc=desc or f"smd[{index}]", disable=not show, leave=False):
        X, y = oracle.draw(1)
        if not average_after_step:
            total += state.w
        smd_risk_step(state, loss.mean_gradient(state.w, X, y), schedule, geom, index)
        if average_after_step:
            total += state.w
    if plain_average and iters > 0:
        state.w_bar = total / iters
    logger.debug(f"Risk minimizer {index} finished {iters} rounds")
    return state
