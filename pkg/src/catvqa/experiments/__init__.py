"""Sweep campaigns, threshold extraction and output files."""
from .outputs import aggregate_csv, emit_outputs, plot_tables, read_records_csv, records_csv
from .sweep import (
    RECORD_FIELDS,
    SweepConfig,
    build_objective,
    default_p_grid,
    instance_graph,
    load_records,
    random_graph,
    run_sweep,
    run_task,
)
from .threshold import (
    DEFAULT_EPSILON,
    Comparison,
    ComparisonSummary,
    CurvePoint,
    ThresholdReport,
    aggregate,
    compare_models,
    extract_threshold,
    mean_and_se,
    threshold_from_curve,
    threshold_reports,
)

__all__ = [
    "RECORD_FIELDS", "SweepConfig", "build_objective", "default_p_grid", "instance_graph",
    "load_records", "random_graph", "run_sweep", "run_task", "DEFAULT_EPSILON", "Comparison",
    "ComparisonSummary", "CurvePoint", "ThresholdReport", "aggregate", "compare_models",
    "extract_threshold", "mean_and_se", "threshold_from_curve", "threshold_reports",
    "aggregate_csv", "emit_outputs", "plot_tables", "read_records_csv", "records_csv",
]
