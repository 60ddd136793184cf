"""Synthetic data, experiment runner and metrics."""
from .data import Dataset, calibrate_verifier, default_model, gen_data, pair_distances
from .experiment import (VARIANTS, DetectorSettings, ExperimentConfig, ImageResult, attack_image,
                         attacked, run_sequence)
from .metrics import (MetricsRow, Summary, compute_metrics, read_metrics_csv, read_trace_csv,
                      summarize, write_metrics_csv, write_summary_csv, write_trace_csv)

__all__ = [
    "Dataset", "calibrate_verifier", "default_model", "gen_data", "pair_distances",
    "VARIANTS", "DetectorSettings", "ExperimentConfig", "ImageResult", "attack_image", "attacked",
    "run_sequence", "MetricsRow", "Summary", "compute_metrics", "read_metrics_csv",
    "read_trace_csv", "summarize", "write_metrics_csv", "write_summary_csv", "write_trace_csv",
]
