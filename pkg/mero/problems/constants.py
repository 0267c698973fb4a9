from typing import List, Optional, Sequence
import logging
import math

import numpy as np
from pydantic import BaseModel, Field

from ..config.settings import get_settings
from ..errors import ConfigurationError
from ..geometry import ProductGeometry
from .base_oracle import Purpose
from .loss import LogisticLoss
from .task import Task

logger = logging.getLogger(__name__)


class ConstantOverrides(BaseModel):
    """User-supplied problem constants; anything left unset is derived."""
    big_g: Optional[float] = Field(None, gt=0)
    smoothness_l: Optional[float] = Field(None, gt=0)
    kappa: float = Field(1.0, ge=1)
    c_const: float = Field(1.0, gt=0)


class ProblemConstants(BaseModel):
    """Constants that fix every step size of the solvers."""
    big_d: float = Field(gt=0)
    big_g: float = Field(gt=0)
    log_m: float = Field(ge=0)
    smoothness_l: float = Field(gt=0)
    kappa: float = 1.0
    c_const: float = 1.0
    p: List[float]
    p_max: float
    omega_max: float
    r_max: Optional[float] = None
    m_const: float
    l_tilde: float
    sigma_sq: float
    g_source: str = "explicit"

    @classmethod
    def from_values(
        cls,
        big_d: float,
        big_g: float,
        log_m: float,
        smoothness_l: float,
        kappa: float = 1.0,
        c_const: float = 1.0,
        p: Optional[Sequence[float]] = None,
        budgets: Optional[Sequence[int]] = None,
        g_source: str = "explicit",
    ) -> "ProblemConstants":
        if p is None:
            p = [1.0] * (len(budgets) if budgets is not None else 1)
        p_arr = np.asarray(p, dtype=float)
        p_max = float(p_arr.max())
        if budgets is not None:
            n = np.asarray(budgets, dtype=float)
            if n.shape != p_arr.shape:
                raise ConfigurationError(f"{len(p_arr)} weights for {len(n)} budgets")
            n_min = float(n.min())
            omega_max = float(np.max(p_arr ** 2 * n_min / n))
            r_max = float(np.max(p_arr / np.sqrt(n)))
        else:
            omega_max, r_max = p_max ** 2, None
        return cls(
            big_d=big_d,
            big_g=big_g,
            log_m=log_m,
            smoothness_l=smoothness_l,
            kappa=kappa,
            c_const=c_const,
            p=p_arr.tolist(),
            p_max=p_max,
            omega_max=omega_max,
            r_max=r_max,
            m_const=math.sqrt(2.0 * big_d ** 2 * big_g ** 2 + 2.0 * log_m),
            l_tilde=2.0 * math.sqrt(2.0) * p_max * (big_d ** 2 * smoothness_l + big_d ** 2 * big_g * math.sqrt(log_m)),
            sigma_sq=2.0 * c_const * omega_max * (kappa * big_d ** 2 * big_g ** 2 + log_m ** 2),
            g_source=g_source,
        )


def _pilot_features(task: Task, draws: int) -> List[np.ndarray]:
    features = []
    for oracle in task.oracles(Purpose.PILOT):
        n = draws if oracle.remaining() is None else min(draws, oracle.remaining())
        X, _ = oracle.draw(n)
        features.append(X)
    return features


def derive_constants(
    geom: ProductGeometry,
    loss: LogisticLoss,
    task: Optional[Task] = None,
    overrides: Optional[ConstantOverrides] = None,
    budgets: Optional[Sequence[int]] = None,
    p: Optional[Sequence[float]] = None,
) -> ProblemConstants:
    """Resolve G and L (explicit, task hint, or pilot estimate) and compute the derived constants.

    ‖∇ℓ(w; x, y)‖ ≤ scale·‖x‖ for every w, so G is a percentile of scale·‖x‖ over the pilot;
    L is scale·λ_max(XᵀX/n)/4, the largest Hessian eigenvalue bound of the logistic risk.
    """
    overrides = overrides or ConstantOverrides()
    settings = get_settings()
    big_g, smoothness_l = overrides.big_g, overrides.smoothness_l
    g_source = "explicit"

    if task is not None and big_g is None and task.feature_norm_bound is not None:
        big_g, g_source = loss.scale * task.feature_norm_bound, "task-bound"
    if task is not None and smoothness_l is None and task.feature_second_moment is not None:
        smoothness_l = loss.scale * task.feature_second_moment / 4.0

    if big_g is None or smoothness_l is None:
        pilot = _pilot_features(task, settings.pilot_draws) if task is not None else []
        rows = sum(X.shape[0] for X in pilot)
        if big_g is None:
            if rows == 0:
                raise ConfigurationError("no gradient bound G given and the pilot sample is empty")
            # ∇ℓ = −scale·y·σ(−y⟨w, x⟩)·x with 0 < σ < 1, so scale·‖x‖ bounds the gradient norm at every w
            norms = np.concatenate([np.linalg.norm(X, axis=1) for X in pilot if X.shape[0]])
            big_g = loss.scale * float(np.percentile(norms, settings.gradient_percentile))
            g_source = "pilot"
            logger.info(f"Estimated G={big_g:.6g} from {rows} pilot draws")
        if smoothness_l is None:
            if rows:
                eig = max(
                    float(np.linalg.eigvalsh(X.T @ X / X.shape[0])[-1]) for X in pilot if X.shape[0]
                )
                smoothness_l = loss.scale * eig / 4.0
            else:
                smoothness_l = big_g ** 2 / (4.0 * loss.scale)
    if not big_g > 0:
        raise ConfigurationError(f"gradient bound must be positive, got {big_g}")

    return ProblemConstants.from_values(
        big_d=geom.primal.d_bound,
        big_g=big_g,
        log_m=geom.simplex.q_bound,
        smoothness_l=max(smoothness_l, np.finfo(float).tiny),
        kappa=overrides.kappa,
        c_const=overrides.c_const,
        p=p if p is not None else [1.0] * geom.simplex.m,
        budgets=budgets,
        g_source=g_source,
    )
