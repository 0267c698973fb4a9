"""Step-size schedules for the risk minimizers and the saddle-point updates."""
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple
import math

from ..errors import ConfigurationError, InvalidArgumentError
from ..problems.constants import ProblemConstants


class ScheduleKind(str, Enum):
    ANYTIME = "anytime"
    FIXED = "fixed"


@dataclass(frozen=True)
class StepSchedule:
    """Per-round step sizes.

    For ANYTIME schedules every stored value is divided by √t; FIXED schedules use the
    stored values as they are. ``risk_steps`` holds one entry per distribution.
    """
    kind: ScheduleKind
    risk_steps: Tuple[float, ...]
    primal_scale: float
    simplex_scale: float

    def __post_init__(self):
        if not self.risk_steps or any(not s > 0 for s in self.risk_steps):
            raise ConfigurationError(f"risk step sizes must be positive, got {self.risk_steps}")
        if not self.primal_scale > 0:
            raise ConfigurationError(f"primal step size must be positive, got {self.primal_scale}")
        # a single distribution has no weights to update
        if self.simplex_scale < 0 or (self.simplex_scale == 0 and len(self.risk_steps) > 1):
            raise ConfigurationError(f"simplex step size must be positive, got {self.simplex_scale}")

    @property
    def m(self) -> int:
        return len(self.risk_steps)

    def _at(self, value: float, t: int) -> float:
        if t < 1:
            raise InvalidArgumentError(f"rounds are counted from 1, got {t}")
        return value / math.sqrt(t) if self.kind is ScheduleKind.ANYTIME else value

    def risk_step(self, index: int, t: int) -> float:
        return self._at(self.risk_steps[index], t)

    def primal_step(self, t: int) -> float:
        return self._at(self.primal_scale, t)

    def simplex_step(self, t: int) -> float:
        return self._at(self.simplex_scale, t)

    @classmethod
    def anytime(cls, constants: ProblemConstants, m: int) -> "StepSchedule":
        """η_t^(i) = D/(G√t), η_t^w = 2D²/(M√t), η_t^q = 2 ln m/(M√t)."""
        d, g, big_m = constants.big_d, constants.big_g, constants.m_const
        return cls(
            kind=ScheduleKind.ANYTIME,
            risk_steps=(d / g,) * m,
            primal_scale=2.0 * d ** 2 / big_m,
            simplex_scale=2.0 * constants.log_m / big_m,
        )

    @classmethod
    def horizon(cls, constants: ProblemConstants, m: int, horizon: int) -> "StepSchedule":
        """Constant steps designed for a known number of rounds T.

        Risk minimizers use √2·D/(G√T); the saddle updates use the merged step
        2/(M√(5T)) mapped to η^w = 2ηD² and η^q = 2η ln m.
        """
        if horizon < 1:
            raise ConfigurationError(f"horizon must be at least 1, got {horizon}")
        d, g = constants.big_d, constants.big_g
        eta = 2.0 / (constants.m_const * math.sqrt(5.0 * horizon))
        return cls(
            kind=ScheduleKind.FIXED,
            risk_steps=(math.sqrt(2.0) * d / (g * math.sqrt(horizon)),) * m,
            primal_scale=2.0 * eta * d ** 2,
            simplex_scale=2.0 * eta * constants.log_m,
        )

    @classmethod
    def weighted(cls, constants: ProblemConstants, budgets: Sequence[int]) -> "StepSchedule":
        """η^(i) = 2D/(G√nᵢ); η_w = 2D²μ and η_q = 2μ ln m with the mirror-prox μ."""
        d, g = constants.big_d, constants.big_g
        mu = mirror_prox_mu(constants, min(budgets))
        return cls(
            kind=ScheduleKind.FIXED,
            risk_steps=tuple(2.0 * d / (g * math.sqrt(n)) for n in budgets),
            primal_scale=2.0 * d ** 2 * mu,
            simplex_scale=2.0 * mu * constants.log_m,
        )

    @classmethod
    def single_risk(cls, big_d: float, big_g: float) -> "StepSchedule":
        """Anytime steps D/(G√t) for one SMD instance on its own."""
        return cls(kind=ScheduleKind.ANYTIME, risk_steps=(big_d / big_g,), primal_scale=big_d / big_g, simplex_scale=0.0)

    @classmethod
    def constant(cls, m: int, eta_risk: float, eta_w: float, eta_q: float) -> "StepSchedule":
        return cls(kind=ScheduleKind.FIXED, risk_steps=(eta_risk,) * m, primal_scale=eta_w, simplex_scale=eta_q)

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "risk_steps": list(self.risk_steps),
            "primal_scale": self.primal_scale,
            "simplex_scale": self.simplex_scale,
        }


def mirror_prox_mu(constants: ProblemConstants, n_min: int) -> float:
    """μ = min(1/(√3·L̃), 2√(2/(7σ²n_m)))."""
    if n_min < 1:
        raise ConfigurationError(f"smallest budget must be at least 1, got {n_min}")
    return min(
        1.0 / (math.sqrt(3.0) * constants.l_tilde),
        2.0 * math.sqrt(2.0 / (7.0 * constants.sigma_sq * n_min)),
    )


def risk_bound_anytime(big_d: float, big_g: float, t: int) -> float:
    """Expected excess risk of one weighted-average SMD instance after t rounds."""
    if t < 1:
        raise InvalidArgumentError(f"t must be at least 1, got {t}")
    return big_d * big_g * (3.0 + math.log(t)) / (4.0 * (math.sqrt(t + 1.0) - 1.0))


def saddle_bound_anytime(big_d: float, big_g: float, m: int, t: int) -> float:
    """Expected saddle-point optimization error of the anytime solver after t rounds."""
    if t < 1:
        raise InvalidArgumentError(f"t must be at least 1, got {t}")
    log_t, log_m = math.log(t), math.log(m)
    big_m = math.sqrt(2.0 * big_d ** 2 * big_g ** 2 + 2.0 * log_m)
    inner = 3.0 + log_t + 16.0 * (1.0 + math.sqrt(log_m)) * math.sqrt(2.0 * (1.0 + log_t))
    numerator = (5.0 + 3.0 * log_t) * big_m + 2.0 * big_d * big_g * inner * (1.0 + log_t)
    return numerator / (2.0 * (math.sqrt(t + 1.0) - 1.0))


def risk_bound_fixed(big_d: float, big_g: float, n: int) -> float:
    """Expected excess risk of the stage-1 solution for a distribution with budget n."""
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")
    return 2.0 * big_d * big_g / math.sqrt(n)

