"""LLM human-surrogate: sequence continuation with and without an
explanation-derived tip, plus the tip generation itself.

Completions are parsed leniently (models rarely obey 'just return the
numbers'), and a parse failure triggers a fresh completion under a derived
seed so the retry is not served from cache.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import prompts
from .errors import ConfigInvalid, InsufficientNumbers, ParseFailed
from .explainer import Explanation
from .gateway import LLMGateway
from .timeseries import TimeSeries, encode_series_text, parse_series_text

MODE_PLAIN = "plain"
MODE_WITH_TIP = "with_tip"
MODE_MONOTONE = "monotone"

_MODE_TEMPLATES = {
    MODE_PLAIN: "llmtime_plain",
    MODE_MONOTONE: "llmtime_monotone",
}

# Offset added to the base seed per parse retry, so each retry is a distinct
# cache entry instead of replaying the unparseable completion.
_RETRY_SEED_STEP = 1_000_003


@dataclass(frozen=True)
class SurrogateConfig:
    encoding_precision: int = 2
    max_parse_retries: int = 2


DEFAULT_SURROGATE = SurrogateConfig()


@dataclass(frozen=True)
class SurrogateForecast:
    values: tuple[float, ...]
    mode: str
    raw_completion: str
    attempts: int


def make_forecast_tip(
    explanation: Explanation,
    endpoint: str,
    gateway: LLMGateway,
    seed: int | None = None,
) -> str:
    """Rewrite an explanation as a recommendation for someone forecasting
    the same series."""
    if not explanation.text:
        raise ConfigInvalid("explanation text must be non-empty")
    prompt = prompts.render("forecast_tip", forecast_explanation=explanation.text)
    return gateway.complete(gateway.request(endpoint, prompt, seed=seed))


def _simulate(
    prompt_builder,
    mode: str,
    horizon: int,
    endpoint: str,
    seed: int,
    gateway: LLMGateway,
    config: SurrogateConfig,
) -> SurrogateForecast:
    last_completion = ""
    for attempt in range(config.max_parse_retries + 1):
        request = gateway.request(
            endpoint, prompt_builder(), seed=seed + _RETRY_SEED_STEP * attempt
        )
        last_completion = gateway.complete(request)
        try:
            values = parse_series_text(last_completion, horizon)
        except InsufficientNumbers:
            continue
        return SurrogateForecast(
            values=tuple(values),
            mode=mode,
            raw_completion=last_completion,
            attempts=attempt + 1,
        )
    raise ParseFailed(
        f"no completion yielded {horizon} numbers after "
        f"{config.max_parse_retries + 1} attempts; last: {last_completion[:200]!r}"
    )


def simulate_plain(
    history: TimeSeries,
    horizon: int,
    endpoint: str,
    seed: int,
    gateway: LLMGateway,
    config: SurrogateConfig = DEFAULT_SURROGATE,
    mode: str = MODE_PLAIN,
) -> SurrogateForecast:
    """Continue the sequence with no explanation (mode 'plain'), or with the
    adversarial constant-prediction instruction (mode 'monotone')."""
    if mode not in _MODE_TEMPLATES:
        raise ConfigInvalid(f"unsupported plain-simulation mode {mode!r}")
    template = _MODE_TEMPLATES[mode]

    def build() -> str:
        return prompts.render(
            template,
            forecast_horizon=str(horizon),
            time_series_data=encode_series_text(history.values, config.encoding_precision),
        )

    return _simulate(build, mode, horizon, endpoint, seed, gateway, config)


def simulate_monotone(
    history: TimeSeries,
    horizon: int,
    endpoint: str,
    seed: int,
    gateway: LLMGateway,
    config: SurrogateConfig = DEFAULT_SURROGATE,
) -> SurrogateForecast:
    return simulate_plain(history, horizon, endpoint, seed, gateway, config, mode=MODE_MONOTONE)


def simulate_with_tip(
    history: TimeSeries,
    horizon: int,
    tip: str,
    endpoint: str,
    seed: int,
    gateway: LLMGateway,
    config: SurrogateConfig = DEFAULT_SURROGATE,
) -> SurrogateForecast:
    """Continue the sequence following a forecast tip."""
    if not tip:
        raise ConfigInvalid("tip must be non-empty")

    def build() -> str:
        return prompts.render(
            "llmtime_with_tip",
            forecast_horizon=str(horizon),
            forecast_tip=tip,
            time_series_data=encode_series_text(history.values, config.encoding_precision),
        )

    return _simulate(build, MODE_WITH_TIP, horizon, endpoint, seed, gateway, config)
