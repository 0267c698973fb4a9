"""Run configuration files.

Grammar: one ``dotted.key = value`` pair per line, ``#`` starts a comment, lists are
comma separated. Dots nest keys into sections, so ``task.synthetic.m = 3`` sets
``task -> synthetic -> m``. Relative paths are resolved against the config file's folder.

    algorithm = mero-anytime, gdro
    task.kind = synthetic
    task.synthetic.m = 3
    task.synthetic.dimension = 20
    iters = 2000
    seeds = 0, 1, 2
    checkpoint_every = 100
    rstar.method = erm
    output_dir = runs/contrast
"""
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union
import hashlib
import logging

from dotenv import dotenv_values
from pydantic import BaseModel, Field, field_validator, model_validator

from ..adult.ingest import AdultConfig
from ..errors import ConfigurationError
from ..problems.constants import ConstantOverrides
from ..problems.sources.synthetic import SyntheticTaskSpec

logger = logging.getLogger(__name__)

PATH_KEYS = ("task.adult.path", "task.adult.cache_dir", "task.finite.path", "rstar.path", "output_dir")


class Algorithm(str, Enum):
    MERO_ANYTIME = "mero-anytime"
    MERO_MULTISTAGE = "mero-multistage"
    MERO_WEIGHTED = "mero-weighted"
    MERO_REFERENCE = "mero-reference"
    GDRO = "gdro"
    GDRO_WEIGHTED = "gdro-weighted"

    @property
    def takes_budgets(self) -> bool:
        return self in (Algorithm.MERO_WEIGHTED, Algorithm.GDRO_WEIGHTED)


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class FiniteTaskConfig(BaseModel):
    path: Path


class TaskConfig(BaseModel):
    kind: Literal["synthetic", "adult", "finite"] = "synthetic"
    synthetic: Optional[SyntheticTaskSpec] = None
    adult: Optional[AdultConfig] = None
    finite: Optional[FiniteTaskConfig] = None

    @field_validator("synthetic", mode="before")
    @classmethod
    def _split_flip_probs(cls, value):
        if isinstance(value, dict) and "flip_probs" in value:
            value = {**value, "flip_probs": _split_list(value["flip_probs"])}
        return value

    @model_validator(mode="after")
    def _check_section(self) -> "TaskConfig":
        if self.kind == "synthetic" and self.synthetic is None:
            self.synthetic = SyntheticTaskSpec()
        if self.kind == "adult" and self.adult is None:
            raise ValueError("task.kind = adult needs task.adult.path")
        if self.kind == "finite" and self.finite is None:
            raise ValueError("task.kind = finite needs task.finite.path")
        return self

    @property
    def known_m(self) -> Optional[int]:
        if self.kind == "synthetic":
            return self.synthetic.m
        if self.kind == "adult":
            return 6
        return None


class ConstantsConfig(ConstantOverrides):
    """Constant overrides plus the domain radius and the loss scale."""
    radius: float = Field(5.0, gt=0)
    scale: float = Field(1.0, gt=0)


class RstarConfig(BaseModel):
    method: Literal["exact", "erm", "file"] = "erm"
    train_n: Optional[int] = Field(None, ge=1)
    eval_n: Optional[int] = Field(None, ge=1)
    path: Optional[Path] = None

    @model_validator(mode="after")
    def _check_path(self) -> "RstarConfig":
        if self.method == "file" and self.path is None:
            raise ValueError("rstar.method = file needs rstar.path")
        return self


class MultistageConfig(BaseModel):
    include_stage2: bool = True
    continue_past_t: bool = False
    horizon_multiple: int = Field(3, ge=1)


class ReferenceConfig(BaseModel):
    pretrain_iters: Optional[int] = Field(None, ge=1)


class RunConfig(BaseModel):
    algorithm: List[Algorithm] = Field(min_length=1)
    task: TaskConfig = Field(default_factory=TaskConfig)
    iters: Optional[int] = Field(None, ge=1)
    budgets: Optional[List[int]] = None
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    checkpoint_every: Optional[int] = Field(None, ge=1)
    n_eval: Optional[int] = Field(None, ge=1)
    constants: ConstantsConfig = Field(default_factory=ConstantsConfig)
    rstar: RstarConfig = Field(default_factory=RstarConfig)
    multistage: MultistageConfig = Field(default_factory=MultistageConfig)
    reference: ReferenceConfig = Field(default_factory=ReferenceConfig)
    output_dir: Path = Path("runs")

    @field_validator("algorithm", "budgets", "seeds", mode="before")
    @classmethod
    def _lists(cls, value):
        return _split_list(value)

    @field_validator("seeds")
    @classmethod
    def _non_negative_seeds(cls, seeds: List[int]) -> List[int]:
        if any(s < 0 for s in seeds):
            raise ValueError("seeds must be non-negative")
        if len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be distinct")
        return seeds

    @model_validator(mode="after")
    def _check_horizons(self) -> "RunConfig":
        weighted = [a for a in self.algorithm if a.takes_budgets]
        anytime = [a for a in self.algorithm if not a.takes_budgets]
        if anytime and self.iters is None:
            raise ValueError(f"{', '.join(a.value for a in anytime)} need iters")
        if weighted and self.budgets is None:
            raise ValueError(f"{', '.join(a.value for a in weighted)} need budgets")
        if self.iters is not None and not anytime:
            raise ValueError("iters is only used by iteration-driven algorithms; use budgets")
        if self.budgets is not None and not weighted:
            raise ValueError("budgets are only used by the weighted algorithms; use iters")
        if self.budgets is not None:
            if any(n < 1 for n in self.budgets):
                raise ValueError("budgets must be positive")
            m = self.task.known_m
            if m is not None and len(self.budgets) != m:
                raise ValueError(f"budgets needs {m} entries, got {len(self.budgets)}")
        if Algorithm.MERO_REFERENCE in self.algorithm and self.reference.pretrain_iters is None:
            raise ValueError("mero-reference needs reference.pretrain_iters")
        if self.rstar.method == "exact" and self.task.kind == "synthetic":
            raise ValueError("rstar.method = exact needs finite-support evaluation (task.kind finite or adult)")
        return self

    def config_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()


def nest_dotted(flat: Dict[str, Optional[str]]) -> Dict[str, Any]:
    """{"a.b": "1"} -> {"a": {"b": "1"}}."""
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        if value is None:
            raise ConfigurationError(f"config key {key!r} has no value")
        parts = key.strip().split(".")
        node = nested
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"config key {key!r} conflicts with a plain value for {part!r}")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigurationError(f"config key {key!r} conflicts with its own sub-keys")
        node[parts[-1]] = value
    return nested


def _resolve_paths(flat: Dict[str, Optional[str]], base: Path) -> Dict[str, Optional[str]]:
    resolved = dict(flat)
    for key in PATH_KEYS:
        value = resolved.get(key)
        if value and not Path(value).is_absolute():
            resolved[key] = str(base / value)
    return resolved


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a run config; pydantic ValidationError carries field-level messages."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    flat = dotenv_values(path, encoding="utf-8")
    if not flat:
        raise ConfigurationError(f"{path} holds no settings")
    flat = _resolve_paths(flat, path.parent)
    config = RunConfig.model_validate(nest_dotted(flat))
    logger.info(f"Loaded run config {path} ({', '.join(a.value for a in config.algorithm)}; seeds {config.seeds})")
    return config
