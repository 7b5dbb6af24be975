"""
Experiment harness: configuration, orchestration and reports.
"""

from .config import DataConfig, ExperimentConfig, RunConfig
from .experiments import (
    Problem,
    fit_base,
    generate_dataset,
    held_out_indices,
    load_problem,
    run_accuracy_experiment,
    run_certify_experiment,
    run_fit,
    run_rate_check,
    run_timing_experiment,
    run_timing_sweep,
    synthetic_spec,
)
from .report import (
    BootstrapSummary,
    ExperimentReport,
    ExperimentSummary,
    FitReport,
    ReplicationResult,
    TimingSweep,
    Timings,
    WeightRecord,
    emit_report,
    load_report,
    report_frame,
)

__all__ = [
    "BootstrapSummary",
    "DataConfig",
    "ExperimentConfig",
    "ExperimentReport",
    "ExperimentSummary",
    "FitReport",
    "Problem",
    "ReplicationResult",
    "RunConfig",
    "TimingSweep",
    "Timings",
    "WeightRecord",
    "emit_report",
    "fit_base",
    "generate_dataset",
    "held_out_indices",
    "load_problem",
    "load_report",
    "report_frame",
    "run_accuracy_experiment",
    "run_certify_experiment",
    "run_fit",
    "run_rate_check",
    "run_timing_experiment",
    "run_timing_sweep",
    "synthetic_spec",
]

# keep this list sorted
assert __all__ == sorted(__all__)
