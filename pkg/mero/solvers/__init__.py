from .anytime import anytime_mero_round, run_anytime_mero, run_gdro_smd, run_reference_mero
from .gradients import mero_gradients, saddle_gradients, weighted_gradients
from .multistage import run_multistage_mero
from .result import Checkpoint, SolverResult, checkpoint_grid
from .schedules import (
    ScheduleKind,
    StepSchedule,
    mirror_prox_mu,
    risk_bound_anytime,
    risk_bound_fixed,
    saddle_bound_anytime,
)
from .smd import run_risk_minimizer, smd_risk_step
from .state import AnytimeMeroState, RiskMinimizerState, TwoStageState
from .weighted import (
    run_two_stage_weighted_mero,
    run_weighted_gdro,
    smpa_round,
    smpa_rounds,
    weights_from_budgets,
)
