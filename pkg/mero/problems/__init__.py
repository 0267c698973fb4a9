from .base_oracle import DistributionOracle, OracleKind, Purpose, stream_seed
from .budgets import imbalanced_budgets
from .constants import ConstantOverrides, ProblemConstants, derive_constants
from .loss import LogisticLoss, Sample, logistic_grad, logistic_loss
from .task import Task
