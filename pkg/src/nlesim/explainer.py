"""Baseline explanation generator.

Three chained LLM calls over one quantitative pass: templated per-segment
summaries are aggregated into a segment analysis, folded with the raw series
into a history analysis, and finally combined with the forecast and an
importance preanalysis into the explanation itself.  The full chain of
(prompt, completion) pairs is kept as provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import prompts
from .errors import ChainAborted, ConfigInvalid, EmptyCompletion
from .forecasters import ImportanceProfile
from .gateway import LLMGateway
from .timeseries import (
    ForecastWindow,
    SegmentationConfig,
    TimeSeries,
    encode_series_text,
    render_segment_summary,
    segment_series,
)


@dataclass(frozen=True)
class ExplainerConfig:
    encoding_precision: int = 2
    max_explanation_chars: int = 2000
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)


DEFAULT_EXPLAINER = ExplainerConfig()


@dataclass(frozen=True)
class Explanation:
    """An NLE plus the full provenance of the chain that produced it."""

    text: str
    history_id: str
    forecaster_id: str
    explainer_endpoint_id: str
    chain: tuple[tuple[str, str], ...]
    seed: int

    def __post_init__(self) -> None:
        if not self.text:
            raise ConfigInvalid("explanation text must be non-empty")


def render_preanalysis(importance: ImportanceProfile, top_k: int = 3) -> str:
    """One-sentence rendering of the most influential history indices."""
    indices = importance.top_indices(top_k)
    listed = ", ".join(str(i) for i in indices)
    return f"The forecaster's output is most sensitive to history indices {listed}."


def build_segment_analysis(
    segment_summary: str,
    endpoint: str,
    gateway: LLMGateway,
    seed: int | None = None,
) -> tuple[str, str]:
    """First chain stage; returns (rendered prompt, completion)."""
    if not segment_summary.startswith("There are "):
        raise ConfigInvalid("segment summary must come from render_segment_summary")
    prompt = prompts.render("segment_analysis", segment_summary=segment_summary)
    return prompt, gateway.complete(gateway.request(endpoint, prompt, seed=seed))


def build_history_analysis(
    series: TimeSeries,
    segment_analysis: str,
    endpoint: str,
    gateway: LLMGateway,
    seed: int | None = None,
    precision: int = DEFAULT_EXPLAINER.encoding_precision,
) -> tuple[str, str]:
    """Second chain stage; returns (rendered prompt, completion)."""
    if not segment_analysis:
        raise ConfigInvalid("segment analysis must be non-empty")
    prompt = prompts.render(
        "history_analysis",
        time_series_data=encode_series_text(series.values, precision),
        segment_analysis=segment_analysis,
    )
    return prompt, gateway.complete(gateway.request(endpoint, prompt, seed=seed))


def generate_explanation(
    series: TimeSeries,
    forecast: ForecastWindow,
    importance: ImportanceProfile,
    endpoint: str,
    seed: int,
    gateway: LLMGateway,
    config: ExplainerConfig = DEFAULT_EXPLAINER,
) -> Explanation:
    """Run the full three-call chain and record its provenance."""
    if forecast.history_id != series.id:
        raise ConfigInvalid(
            f"forecast belongs to {forecast.history_id!r}, not {series.id!r}"
        )
    if len(importance.scores) != len(series):
        raise ConfigInvalid("importance profile length must match the series")

    try:
        summary = render_segment_summary(segment_series(series, config.segmentation))
        prompt1, analysis1 = build_segment_analysis(summary, endpoint, gateway, seed)
        prompt2, analysis2 = build_history_analysis(
            series, analysis1, endpoint, gateway, seed, config.encoding_precision
        )
        prompt3 = prompts.render(
            "forecast_explanation",
            time_series_data=encode_series_text(series.values, config.encoding_precision),
            time_series_analysis=analysis2,
            forecasted_data=encode_series_text(forecast.values, config.encoding_precision),
            forecast_horizon=str(forecast.horizon),
            forecast_preanalysis=render_preanalysis(importance),
        )
        text = gateway.complete(gateway.request(endpoint, prompt3, seed=seed))
    except EmptyCompletion as exc:
        raise ChainAborted(str(exc)) from exc

    # Cap pathological completions so downstream prompts stay bounded.
    text = text[: config.max_explanation_chars]
    return Explanation(
        text=text,
        history_id=series.id,
        forecaster_id=forecast.forecaster_id,
        explainer_endpoint_id=endpoint,
        chain=((prompt1, analysis1), (prompt2, analysis2), (prompt3, text)),
        seed=seed,
    )
