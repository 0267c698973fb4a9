from .ingest import (
    ENCODING_MAP,
    ENCODING_VERSION,
    EXPECTED_FEATURE_DIM,
    GROUP_NAMES,
    AdultConfig,
    GroupedDataset,
    build_adult_task,
    encoding_feature_names,
    group_oracle,
    load_and_encode,
)
