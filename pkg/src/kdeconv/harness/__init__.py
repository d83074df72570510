"""Configuration, replication studies, reports and the command line."""

from .config import BandwidthSpec, ScenarioConfig, TGridSpec, load_config
from .study import (
    StudyReport,
    generate_sample,
    run_bias_study,
    run_coverage_study,
    run_efficiency_study,
    run_rate_study,
    summarize,
)

__all__ = [
    "BandwidthSpec",
    "ScenarioConfig",
    "TGridSpec",
    "load_config",
    "StudyReport",
    "generate_sample",
    "run_bias_study",
    "run_coverage_study",
    "run_efficiency_study",
    "run_rate_study",
    "summarize",
]
