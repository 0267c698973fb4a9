from .empirical import EmpiricalOracle, SamplingMode
from .finite_support import (
    FiniteSupportDistribution,
    FiniteSupportOracle,
    build_finite_task,
    exact_risk,
    load_finite_task,
    read_finite_support,
    write_finite_support,
)
from .synthetic import SyntheticOracle, SyntheticTaskSpec, build_synthetic_task, true_classifiers
