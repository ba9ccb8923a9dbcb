"""Evaluation protocol: metrics, splits, end-to-end runs, sensitivity
experiments and the synthetic fleet generator."""
from .experiments import NOISE_VARIANTS, SIZES, noise_experiment, size_experiment
from .fleet import FleetConfig, bundled_config, combine, generate_fleet, split_truth
from .metrics import ConfusionMatrix, MetricsReport, metrics
from .pipeline import (
    MODES,
    PipelineConfig,
    PipelineResult,
    compare_modes,
    learn,
    run_pipeline,
    split,
)
