"""Simulatability evaluation for natural-language explanations of black-box
time-series forecasts: explanation generation, surrogate simulation, direct
and synthetic metrics, baselines, datasets, harness and human-study backend.
"""

from .metrics import (
    DistanceReport,
    aggregate,
    cohen_kappa,
    distance_report,
    nmae,
    normalized_synthetic_score,
    nrmse,
    smape,
)
from .timeseries import (
    ForecastWindow,
    Segment,
    Segmentation,
    SegmentationConfig,
    TimeSeries,
    detect_seasonality,
    encode_series_text,
    parse_series_text,
    render_segment_summary,
    segment_series,
    segment_stats,
)
from .forecasters import (
    ForecasterSpec,
    ImportanceProfile,
    external_forecast,
    forecast,
    occlusion_importance,
    random_forecast,
)
from .simulatability import (
    BASELINES,
    EndpointRoles,
    SimulationResult,
    classify_usefulness,
    direct_simulatability,
    extract_generator_code,
    synthetic_simulatability,
)

__all__ = [
    "BASELINES",
    "DistanceReport",
    "EndpointRoles",
    "ForecastWindow",
    "ForecasterSpec",
    "ImportanceProfile",
    "Segment",
    "Segmentation",
    "SegmentationConfig",
    "SimulationResult",
    "TimeSeries",
    "aggregate",
    "classify_usefulness",
    "cohen_kappa",
    "detect_seasonality",
    "direct_simulatability",
    "distance_report",
    "encode_series_text",
    "external_forecast",
    "extract_generator_code",
    "forecast",
    "nmae",
    "normalized_synthetic_score",
    "nrmse",
    "occlusion_importance",
    "parse_series_text",
    "random_forecast",
    "render_segment_summary",
    "segment_series",
    "segment_stats",
    "smape",
    "synthetic_simulatability",
]

__version__ = "0.1.0"
