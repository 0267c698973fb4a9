from .metrics import mer, mwer, slope_fit
from .risk import (
    MinimalRiskEstimate,
    MinimalRiskMethod,
    erm_minimal_risks,
    estimate_minimal_risk,
    estimate_risk,
    exact_minimal_risk,
    exact_minimal_risks,
    read_rstar_file,
    write_rstar_file,
)
from .saddle import SaddleOracle, brute_force_saddle, min_grid_resolution
from .trace import TraceRecord, TraceRecorder, read_trace_csv, write_trace_csv
