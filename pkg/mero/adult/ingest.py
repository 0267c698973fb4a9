"""Adult census data: parsing, one-hot encoding, demographic groups and a binary cache.

Encoding map (version 1), 103 features in this order:
  age/100, capital-gain/100000, capital-loss/5000, hours-per-week/100, then one-hot blocks
  for workclass (8), education (16), marital-status (7), occupation (14),
  relationship (6), race (5), sex (2) and native-country (41).
fnlwgt and education-num are not used. Rows with a missing ('?') field are dropped.
Groups are race (white, black, others) × sex, ordered as GROUP_NAMES.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union
import difflib
import hashlib
import logging
import struct

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from ..config.settings import get_settings
from ..errors import InvalidArgumentError, SchemaError
from ..problems.base_oracle import TRAINING_PURPOSES, Purpose, stream_seed
from ..problems.sources.empirical import EmpiricalOracle, SamplingMode
from ..problems.sources.finite_support import FiniteSupportDistribution, FiniteSupportOracle
from ..problems.task import Task

logger = logging.getLogger(__name__)

ENCODING_VERSION = 1
EXPECTED_FEATURE_DIM = 103
FULL_DATASET_ROWS = 48842
# per-group sizes left for training after the default holdout of 364 rows each
EXPECTED_RESIDUAL_SIZES = (26656, 11519, 1780, 1720, 999, 364)

RAW_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]

NUMERIC_SCALES: Dict[str, float] = {
    "age": 100.0,
    "capital-gain": 100_000.0,
    "capital-loss": 5_000.0,
    "hours-per-week": 100.0,
}

ENCODING_MAP: Dict[str, List[str]] = {
    "workclass": [
        "Private", "Self-emp-not-inc", "Self-emp-inc", "Federal-gov", "Local-gov",
        "State-gov", "Without-pay", "Never-worked",
    ],
    "education": [
        "Bachelors", "Some-college", "11th", "HS-grad", "Prof-school", "Assoc-acdm",
        "Assoc-voc", "9th", "7th-8th", "12th", "Masters", "1st-4th", "10th", "Doctorate",
        "5th-6th", "Preschool",
    ],
    "marital-status": [
        "Married-civ-spouse", "Divorced", "Never-married", "Separated", "Widowed",
        "Married-spouse-absent", "Married-AF-spouse",
    ],
    "occupation": [
        "Tech-support", "Craft-repair", "Other-service", "Sales", "Exec-managerial",
        "Prof-specialty", "Handlers-cleaners", "Machine-op-inspct", "Adm-clerical",
        "Farming-fishing", "Transport-moving", "Priv-house-serv", "Protective-serv",
        "Armed-Forces",
    ],
    "relationship": ["Wife", "Own-child", "Husband", "Not-in-family", "Other-relative", "Unmarried"],
    "race": ["White", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other", "Black"],
    "sex": ["Female", "Male"],
    "native-country": [
        "United-States", "Cambodia", "England", "Puerto-Rico", "Canada", "Germany",
        "Outlying-US(Guam-USVI-etc)", "India", "Japan", "Greece", "South", "China", "Cuba",
        "Iran", "Honduras", "Philippines", "Italy", "Poland", "Jamaica", "Vietnam", "Mexico",
        "Portugal", "Ireland", "France", "Dominican-Republic", "Laos", "Ecuador", "Taiwan",
        "Haiti", "Columbia", "Hungary", "Guatemala", "Nicaragua", "Scotland", "Thailand",
        "Yugoslavia", "El-Salvador", "Trinadad&Tobago", "Peru", "Hong", "Holand-Netherlands",
    ],
}

GROUP_NAMES = [
    ("white", "male"), ("white", "female"),
    ("black", "male"), ("black", "female"),
    ("others", "male"), ("others", "female"),
]

_CACHE_MAGIC = b"MEROADLT"
_CACHE_HEADER = struct.Struct("<8sI32sIII6I")


class AdultConfig(BaseModel):
    path: Path
    holdout_per_group: int = Field(364, ge=0)
    once_each: bool = False
    seed: int = Field(0, ge=0)
    use_cache: bool = True
    cache_dir: Optional[Path] = None


@dataclass
class GroupedDataset:
    """Encoded rows split into the six groups, each with a held-out evaluation part."""
    groups: List[Tuple[np.ndarray, np.ndarray]]
    holdout: List[Tuple[np.ndarray, np.ndarray]]
    feature_dim: int
    parsed_rows: int = 0
    dropped_missing: int = 0
    malformed_rows: int = 0
    seed: int = 0
    checksum: str = ""
    group_names: List[Tuple[str, str]] = field(default_factory=lambda: list(GROUP_NAMES))

    @property
    def group_sizes(self) -> List[int]:
        return [X.shape[0] for X, _ in self.groups]

    @property
    def holdout_sizes(self) -> List[int]:
        return [X.shape[0] for X, _ in self.holdout]


def encoding_feature_names() -> List[str]:
    names = list(NUMERIC_SCALES)
    for column, values in ENCODING_MAP.items():
        names.extend(f"{column}={v}" for v in values)
    return names


def _schema_diff(expected: List[str], observed: List[str], label: str) -> str:
    return "\n".join(difflib.unified_diff(
        expected, observed, fromfile=f"encoding map v{ENCODING_VERSION}", tofile=label, lineterm="",
    ))


def check_encoding_map() -> int:
    names = encoding_feature_names()
    if len(names) != EXPECTED_FEATURE_DIM:
        raise SchemaError(
            f"encoding map yields {len(names)} features, expected {EXPECTED_FEATURE_DIM}",
            _schema_diff([f"{EXPECTED_FEATURE_DIM} features"], [f"{len(names)} features"] + names, "encoding"),
        )
    return len(names)


def _group_index(race: str, sex: str) -> int:
    race_bucket = {"White": "white", "Black": "black"}.get(race, "others")
    return GROUP_NAMES.index((race_bucket, sex.lower()))


def file_checksum(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _read_raw(path: Path) -> Tuple[pd.DataFrame, int]:
    bad_lines: List[List[str]] = []

    def on_bad_line(fields: List[str]) -> None:
        bad_lines.append(fields)
        return None

    try:
        frame = pd.read_csv(
            path,
            header=None,
            names=RAW_COLUMNS,
            engine="python",
            skipinitialspace=True,
            na_values=["?"],
            keep_default_na=False,
            comment="|",
            dtype=str,
            on_bad_lines=on_bad_line,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=RAW_COLUMNS, dtype=str)
    if bad_lines:
        logger.warning(f"Skipped {len(bad_lines)} malformed lines in {path}")
    return frame, len(bad_lines)


def _encode(frame: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return features (n, 103), labels in {-1, +1} and group indices."""
    unknown = {
        column: sorted(set(frame[column]) - set(values))
        for column, values in ENCODING_MAP.items()
    }
    unknown = {column: values for column, values in unknown.items() if values}
    if unknown:
        observed = encoding_feature_names() + [f"{c}={v}" for c, vs in unknown.items() for v in vs]
        raise SchemaError(
            f"raw file has categories outside the encoding map: {unknown}",
            _schema_diff(encoding_feature_names(), observed, "raw file categories"),
        )
    blocks = [
        (frame[column].astype(float).to_numpy() / scale)[:, None]
        for column, scale in NUMERIC_SCALES.items()
    ]
    for column, values in ENCODING_MAP.items():
        codes = pd.Categorical(frame[column], categories=values).codes
        block = np.zeros((len(frame), len(values)))
        block[np.arange(len(frame)), codes] = 1.0
        blocks.append(block)
    X = np.hstack(blocks) if len(frame) else np.zeros((0, EXPECTED_FEATURE_DIM))
    # same precision as the cache, so cached and fresh runs see identical rows
    X = X.astype("<f4").astype(float)
    y = np.where(frame["income"].str.startswith(">"), 1.0, -1.0)
    groups = np.array([_group_index(r, s) for r, s in zip(frame["race"], frame["sex"])], dtype=np.int64)
    return X, y, groups


def _parse(path: Path) -> Tuple[List[Tuple[np.ndarray, np.ndarray]], Dict[str, int]]:
    frame, malformed = _read_raw(path)
    if frame.empty:
        logger.warning(f"{path} holds no rows; every group is empty")
        empty = (np.zeros((0, EXPECTED_FEATURE_DIM)), np.zeros(0))
        return [empty] * len(GROUP_NAMES), {"parsed": 0, "missing": 0, "malformed": malformed}

    income = frame["income"].str.rstrip(".")
    valid_label = income.isin([">50K", "<=50K"])
    numeric_ok = frame[list(NUMERIC_SCALES)].apply(pd.to_numeric, errors="coerce").notna() | frame[
        list(NUMERIC_SCALES)
    ].isna()
    valid = valid_label & numeric_ok.all(axis=1)
    malformed += int((~valid).sum())
    frame = frame[valid].assign(income=income[valid])
    parsed = len(frame)

    used = list(NUMERIC_SCALES) + list(ENCODING_MAP) + ["income"]
    complete = frame[used].notna().all(axis=1)
    missing = int((~complete).sum())
    frame = frame[complete]
    logger.info(f"Parsed {parsed} rows from {path}; dropped {missing} with missing fields, {malformed} malformed")

    X, y, group_ids = _encode(frame)
    groups = [(X[group_ids == g], y[group_ids == g]) for g in range(len(GROUP_NAMES))]
    return groups, {"parsed": parsed, "missing": missing, "malformed": malformed}


def _cache_path(config: AdultConfig) -> Path:
    directory = config.cache_dir or config.path.parent
    return directory / get_settings().adult_cache_name


def write_cache(path: Path, groups, checksum: str, counts: Dict[str, int]) -> None:
    sizes = [X.shape[0] for X, _ in groups]
    header = _CACHE_HEADER.pack(
        _CACHE_MAGIC, ENCODING_VERSION, bytes.fromhex(checksum), EXPECTED_FEATURE_DIM,
        counts["parsed"], counts["missing"], *sizes,
    )
    with open(path, "wb") as handle:
        handle.write(header)
        for X, y in groups:
            handle.write(np.ascontiguousarray(X, dtype="<f4").tobytes())
            handle.write(np.asarray(y, dtype=np.int8).tobytes())
    logger.info(f"Wrote encoded groups to {path}")


def read_cache(path: Path, checksum: str):
    """Return (groups, counts) when the cache matches the raw file, otherwise None."""
    try:
        data = path.read_bytes()
    except OSError:
        return None
    if len(data) < _CACHE_HEADER.size:
        return None
    magic, version, digest, dim, parsed, missing, *sizes = _CACHE_HEADER.unpack_from(data)
    if magic != _CACHE_MAGIC or version != ENCODING_VERSION or digest.hex() != checksum or dim != EXPECTED_FEATURE_DIM:
        return None
    groups, offset = [], _CACHE_HEADER.size
    for n in sizes:
        X = np.frombuffer(data, dtype="<f4", count=n * dim, offset=offset).reshape(n, dim).astype(float)
        offset += 4 * n * dim
        y = np.frombuffer(data, dtype=np.int8, count=n, offset=offset).astype(float)
        offset += n
        groups.append((X, y))
    return groups, {"parsed": parsed, "missing": missing, "malformed": 0}


def _split_holdout(groups, holdout: int, seed: int):
    rng = np.random.default_rng(seed)
    train, held = [], []
    for X, y in groups:
        order = rng.permutation(X.shape[0])
        take = min(holdout, X.shape[0])
        held.append((X[order[:take]], y[order[:take]]))
        train.append((X[order[take:]], y[order[take:]]))
    return train, held


def load_and_encode(config: AdultConfig) -> GroupedDataset:
    """Parse (or load from cache), encode and split the Adult file into six groups."""
    feature_dim = check_encoding_map()
    checksum = file_checksum(config.path)
    cached = read_cache(_cache_path(config), checksum) if config.use_cache else None
    if cached is not None:
        groups, counts = cached
        logger.info(f"Loaded encoded groups from {_cache_path(config)}")
    else:
        groups, counts = _parse(config.path)
        if config.use_cache and counts["parsed"]:
            write_cache(_cache_path(config), groups, checksum, counts)

    train, held = _split_holdout(groups, config.holdout_per_group, config.seed)
    dataset = GroupedDataset(
        groups=train,
        holdout=held,
        feature_dim=feature_dim,
        parsed_rows=counts["parsed"],
        dropped_missing=counts["missing"],
        malformed_rows=counts["malformed"],
        seed=config.seed,
        checksum=checksum,
    )
    if dataset.parsed_rows == FULL_DATASET_ROWS and config.holdout_per_group == 364:
        check_group_sizes(dataset)
    logger.info(f"Adult groups {dataset.group_sizes} with holdout {dataset.holdout_sizes}")
    return dataset


def check_group_sizes(dataset: GroupedDataset) -> None:
    if tuple(dataset.group_sizes) != EXPECTED_RESIDUAL_SIZES:
        expected = [f"{a}/{b}: {n}" for (a, b), n in zip(GROUP_NAMES, EXPECTED_RESIDUAL_SIZES)]
        observed = [f"{a}/{b}: {n}" for (a, b), n in zip(GROUP_NAMES, dataset.group_sizes)]
        raise SchemaError(
            f"group sizes {dataset.group_sizes} differ from {list(EXPECTED_RESIDUAL_SIZES)}",
            _schema_diff(expected, observed, "observed groups"),
        )


def group_oracle(dataset: GroupedDataset, index: int, mode: SamplingMode, seed) -> EmpiricalOracle:
    if not 0 <= index < len(dataset.groups):
        raise InvalidArgumentError(f"group index must lie in [0, {len(dataset.groups)}), got {index}")
    X, y = dataset.groups[index]
    return EmpiricalOracle(X, y, mode, seed=seed, index=index)


def build_adult_task(dataset: GroupedDataset, once_each: bool, seed: int) -> Task:
    """Training purposes sample the training rows; evaluation is exact over the held-out rows."""
    training_mode = SamplingMode.ONCE_EACH if once_each else SamplingMode.WITH_REPLACEMENT

    def factory(index: int, purpose: Purpose):
        if purpose is Purpose.EVALUATION:
            X, y = dataset.holdout[index]
            if X.shape[0] == 0:
                raise InvalidArgumentError(f"group {index} has no held-out rows to evaluate on")
            holdout = FiniteSupportDistribution(atoms=X, labels=y, probs=np.full(X.shape[0], 1.0 / X.shape[0]))
            return FiniteSupportOracle(holdout, stream_seed(seed, index, purpose), index=index)
        mode = training_mode if purpose in TRAINING_PURPOSES else SamplingMode.WITH_REPLACEMENT
        return group_oracle(dataset, index, mode, stream_seed(seed, index, purpose))

    return Task(
        name="adult",
        m=len(dataset.groups),
        dimension=dataset.feature_dim,
        factory=factory,
        shared_training_stream=once_each,
    )
