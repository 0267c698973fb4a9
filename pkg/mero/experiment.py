"""Config-driven experiment runs: one trace per (algorithm, seed) plus a run manifest."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple
import json
import logging
import time

import numpy as np

from . import __version__
from .adult.ingest import build_adult_task, load_and_encode
from .config.run_config import Algorithm, RunConfig
from .config.settings import get_settings, update_settings
from .errors import ConfigurationError
from .evaluation.risk import (
    MinimalRiskEstimate,
    erm_minimal_risks,
    exact_minimal_risks,
    read_rstar_file,
    write_rstar_file,
)
from .evaluation.trace import TraceRecorder, write_trace_csv
from .geometry import PrimalGeometry, ProductGeometry, SimplexGeometry
from .problems.constants import ConstantOverrides, ProblemConstants, derive_constants
from .problems.loss import LogisticLoss
from .problems.sources.finite_support import load_finite_task
from .problems.sources.synthetic import build_synthetic_task
from .problems.task import Task
from .solvers import (
    StepSchedule,
    checkpoint_grid,
    risk_bound_fixed,
    run_anytime_mero,
    run_gdro_smd,
    run_multistage_mero,
    run_reference_mero,
    run_two_stage_weighted_mero,
    run_weighted_gdro,
    saddle_bound_anytime,
    smpa_rounds,
    weights_from_budgets,
)
from .solvers.result import SolverResult

logger = logging.getLogger(__name__)

RSTAR_FILE = "rstar.csv"
MANIFEST_FILE = "manifest.json"


def _synthetic(config: RunConfig, seed: int) -> Task:
    return build_synthetic_task(config.task.synthetic, stream_seed_value=seed)


def _adult(config: RunConfig, seed: int) -> Task:
    adult = config.task.adult
    return build_adult_task(load_and_encode(adult), once_each=adult.once_each, seed=seed)


def _finite(config: RunConfig, seed: int) -> Task:
    return load_finite_task(config.task.finite.path, seed=seed)


TASK_BUILDERS: Dict[str, Callable[[RunConfig, int], Task]] = {
    "synthetic": _synthetic,
    "adult": _adult,
    "finite": _finite,
}


def build_task(config: RunConfig, seed: int) -> Task:
    return TASK_BUILDERS[config.task.kind](config, seed)


def build_geometry(config: RunConfig, task: Task) -> ProductGeometry:
    return ProductGeometry(
        primal=PrimalGeometry(dimension=task.dimension, radius=config.constants.radius),
        simplex=SimplexGeometry(m=task.m),
    )


def _overrides(config: RunConfig) -> ConstantOverrides:
    return ConstantOverrides(**config.constants.model_dump(include=set(ConstantOverrides.model_fields)))


def effective_seed(seed: int) -> int:
    return seed + get_settings().seed_offset


def minimal_risks(config: RunConfig, task: Task, loss: LogisticLoss, geom: ProductGeometry, seed: int) -> MinimalRiskEstimate:
    """R̂* for every distribution, by the method the config names."""
    method = config.rstar.method
    if method == "file":
        return read_rstar_file(config.rstar.path, task.m)
    if method == "exact":
        return exact_minimal_risks(task, loss, geom.primal)
    settings = get_settings()
    constants = derive_constants(geom, loss, task, _overrides(config))
    return erm_minimal_risks(
        task, loss, geom.primal, constants.big_g,
        train_n=config.rstar.train_n or settings.rstar_train_n,
        eval_n=config.rstar.eval_n or settings.rstar_eval_n,
        seed=seed,
    )


@dataclass
class RunPlan:
    algorithm: Algorithm
    seed: int
    constants: ProblemConstants
    schedule: StepSchedule
    rounds: int
    p: np.ndarray


def plan_run(config: RunConfig, algorithm: Algorithm, seed: int, task: Task, loss: LogisticLoss, geom: ProductGeometry) -> RunPlan:
    """Constants, step sizes and the number of checkpointed rounds of one run."""
    budgets = config.budgets if algorithm.takes_budgets else None
    if budgets is not None and len(budgets) != task.m:
        raise ConfigurationError(f"budgets needs {task.m} entries, got {len(budgets)}")
    p = weights_from_budgets(budgets) if budgets is not None else np.ones(task.m)
    constants = derive_constants(geom, loss, task, _overrides(config), budgets=budgets, p=p)

    if algorithm.takes_budgets:
        schedule = StepSchedule.weighted(constants, budgets)
        rounds = smpa_rounds(budgets, with_stage1=algorithm is Algorithm.MERO_WEIGHTED)
    elif algorithm is Algorithm.MERO_MULTISTAGE:
        schedule = StepSchedule.horizon(constants, task.m, config.iters)
        ms = config.multistage
        rounds = config.iters * ms.horizon_multiple if ms.continue_past_t else config.iters
    else:
        schedule = StepSchedule.anytime(constants, task.m)
        rounds = config.iters
    if rounds < 1:
        raise ConfigurationError(f"{algorithm.value}: budgets {budgets} leave no rounds to run")
    return RunPlan(algorithm, seed, constants, schedule, rounds, p)


def execute(config: RunConfig, plan: RunPlan, task: Task, loss: LogisticLoss, geom: ProductGeometry, recorder) -> SolverResult:
    marks = checkpoint_grid(plan.rounds, config.checkpoint_every)
    common = dict(checkpoints=marks, on_checkpoint=recorder)
    algorithm = plan.algorithm
    if algorithm is Algorithm.MERO_ANYTIME:
        return run_anytime_mero(task, loss, geom, plan.schedule, config.iters, **common)
    if algorithm is Algorithm.GDRO:
        return run_gdro_smd(task, loss, geom, plan.schedule, config.iters, **common)
    if algorithm is Algorithm.MERO_REFERENCE:
        return run_reference_mero(
            task, loss, geom, plan.schedule, config.iters,
            pretrain_iters=config.reference.pretrain_iters, **common,
        )
    if algorithm is Algorithm.MERO_MULTISTAGE:
        ms = config.multistage
        return run_multistage_mero(
            task, loss, geom, plan.schedule, config.iters,
            include_stage2=ms.include_stage2,
            continue_past_t=ms.continue_past_t,
            horizon_multiple=ms.horizon_multiple,
            **common,
        )
    if algorithm is Algorithm.MERO_WEIGHTED:
        return run_two_stage_weighted_mero(task, loss, geom, plan.schedule, config.budgets, p=plan.p, **common)
    return run_weighted_gdro(task, loss, geom, plan.schedule, config.budgets, p=plan.p, **common)


def trace_name(algorithm: Algorithm, seed: int) -> str:
    return f"trace_{algorithm.value}_seed{seed}.csv"


def run_one(config: RunConfig, algorithm: Algorithm, seed: int, rstar: MinimalRiskEstimate, out_dir: Path) -> Dict[str, Any]:
    """One (algorithm, seed) run: solve, record checkpoints and write the trace."""
    started = time.perf_counter()
    settings = get_settings()
    task = build_task(config, seed)
    geom = build_geometry(config, task)
    loss = LogisticLoss(scale=config.constants.scale)
    plan = plan_run(config, algorithm, seed, task, loss, geom)

    recorder = TraceRecorder(
        task, loss, rstar,
        run_id=f"{algorithm.value}-{seed}",
        algo=algorithm.value,
        seed=seed,
        p=plan.p,
        n_eval=config.n_eval or settings.eval_samples,
        record_wall_clock=settings.record_wall_clock,
    )
    result = execute(config, plan, task, loss, geom, recorder)
    path = out_dir / trace_name(algorithm, seed)
    write_trace_csv(path, recorder.records)

    final = recorder.records[-1]
    summary = {
        "algorithm": algorithm.value,
        "seed": seed,
        "trace": path.name,
        "rounds": result.rounds,
        "samples_per_dist": [int(n) for n in result.samples_per_dist],
        "final_mer": final.mer,
        "final_mwer": final.mwer,
        "constants": plan.constants.model_dump(),
        "schedule": plan.schedule.describe(),
        "p": plan.p.tolist(),
        "wall_seconds": time.perf_counter() - started,
    }
    if algorithm.takes_budgets:
        summary["risk_bound_fixed"] = [
            risk_bound_fixed(plan.constants.big_d, plan.constants.big_g, n) for n in config.budgets
        ]
    else:
        summary["saddle_bound_anytime"] = saddle_bound_anytime(
            plan.constants.big_d, plan.constants.big_g, task.m, plan.rounds
        )
    logger.info(f"{algorithm.value} seed {seed}: {result.rounds} rounds, final MER {final.mer:.6g}")
    return summary


def _worker(args: Tuple[RunConfig, Algorithm, int, MinimalRiskEstimate, Path, Dict[str, Any]]) -> Dict[str, Any]:
    config, algorithm, seed, rstar, out_dir, settings = args
    update_settings(**settings)
    logging.basicConfig(level=settings["log_level"])
    return run_one(config, algorithm, seed, rstar, out_dir)


def _rstar_summary(rstar: MinimalRiskEstimate) -> Dict[str, Any]:
    return {
        "values": rstar.values.tolist(),
        "se": rstar.se.tolist(),
        "method": rstar.method.value,
        "train_n": rstar.erm_train_samples,
        "eval_n": rstar.erm_eval_samples,
        "seed": rstar.seed,
    }


def cmd_run(config: RunConfig, jobs: int = 1, out_dir: Optional[Path] = None) -> Path:
    """Run every (algorithm, seed) pair of the config and write traces plus the manifest."""
    started = time.perf_counter()
    out_dir = Path(out_dir or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = [effective_seed(s) for s in config.seeds]

    if config.task.kind == "adult":
        # parse once so parallel workers share the cache instead of racing to write it
        load_and_encode(config.task.adult)

    task = build_task(config, seeds[0])
    geom = build_geometry(config, task)
    loss = LogisticLoss(scale=config.constants.scale)
    rstar = minimal_risks(config, task, loss, geom, seeds[0])
    logger.info(f"Minimal risks ({rstar.method.value}): {np.round(rstar.values, 6).tolist()}")

    jobs_list = [(config, a, s, rstar, out_dir, get_settings().model_dump()) for a in config.algorithm for s in seeds]
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_worker, jobs_list))
    else:
        runs = [run_one(c, a, s, r, o) for c, a, s, r, o, _ in jobs_list]

    manifest = {
        "version": __version__,
        "config_hash": config.config_hash(),
        "config": config.model_dump(mode="json"),
        "seeds": seeds,
        "seed_offset": get_settings().seed_offset,
        "task": {"name": task.name, "m": task.m, "dimension": task.dimension},
        "rstar": _rstar_summary(rstar),
        "runs": runs,
        "wall_seconds": time.perf_counter() - started,
    }
    path = out_dir / MANIFEST_FILE
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
    logger.info(f"Wrote {len(runs)} traces and {path}")
    return path


def cmd_estimate_rstar(config: RunConfig, out_dir: Optional[Path] = None) -> Path:
    """Estimate the minimal risks of the config's task and write them as rstar.csv."""
    if config.rstar.method == "file":
        raise ConfigurationError("rstar.method = file has nothing to estimate; use exact or erm")
    out_dir = Path(out_dir or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = effective_seed(config.seeds[0])
    task = build_task(config, seed)
    geom = build_geometry(config, task)
    rstar = minimal_risks(config, task, LogisticLoss(scale=config.constants.scale), geom, seed)
    path = out_dir / RSTAR_FILE
    write_rstar_file(path, rstar)
    return path
