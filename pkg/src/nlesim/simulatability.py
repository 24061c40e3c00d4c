"""Direct and synthetic simulatability, end to end.

Direct: the surrogate predicts the black-box forecast on the original
series, with or without an explanation-derived tip; the distance between the
two forecasts is the score.  Synthetic: a generator function is produced
from the explanation alone, executed in an isolated runner to yield a fresh
series, and the same simulation runs there.  Four baselines cover the sanity
checks: plain continuation, explained random forecast, adversarial constant
prompt, and explained true forecast.
"""

from __future__ import annotations

import json
import math
import re
import subprocess
from dataclasses import dataclass
from typing import Protocol, Sequence

from .errors import (
    CodegenFailed,
    ConfigInvalid,
    EmptyCode,
    ExecutorFailed,
    NoGeneratorTag,
    NonFiniteSeries,
)
from . import prompts
from .explainer import Explanation, ExplainerConfig, DEFAULT_EXPLAINER, generate_explanation
from .forecasters import ForecasterSpec, forecast, occlusion_importance, random_forecast
from .gateway import LLMGateway
from .metrics import DistanceReport, distance_report, normalized_synthetic_score
from .surrogate import (
    SurrogateConfig,
    DEFAULT_SURROGATE,
    make_forecast_tip,
    simulate_monotone,
    simulate_plain,
    simulate_with_tip,
)
from .timeseries import TimeSeries

BASELINE_PLAIN = "LLMTime"
BASELINE_RANDOM = "LLMTime_R"
BASELINE_MONOTONE = "LLMTime_M"
BASELINE_EXPLAINED = "LLMTime_E"
BASELINES = (BASELINE_PLAIN, BASELINE_RANDOM, BASELINE_MONOTONE, BASELINE_EXPLAINED)

MODE_DIRECT = "direct"
MODE_SYNTHETIC = "synthetic"

_GENERATOR_RE = re.compile(r"<generator>(.*?)</generator>", re.DOTALL)
_FENCE_RE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.DOTALL)

# Seed offset separating codegen completions from surrogate completions.
_CODEGEN_SEED_STEP = 7_000_003


@dataclass(frozen=True)
class EndpointRoles:
    """Which registered endpoint serves each pipeline role."""

    surrogate: str
    explainer: str
    tip: str | None = None       # defaults to the surrogate endpoint
    codegen: str | None = None   # defaults to the surrogate endpoint

    @property
    def tip_endpoint(self) -> str:
        return self.tip or self.surrogate

    @property
    def codegen_endpoint(self) -> str:
        return self.codegen or self.surrogate


@dataclass(frozen=True)
class SimulatabilityConfig:
    explainer: ExplainerConfig = DEFAULT_EXPLAINER
    surrogate: SurrogateConfig = DEFAULT_SURROGATE
    codegen_retries: int = 3
    synthetic_total_length: int | None = None  # None: history length + horizon
    executor_timeout_s: int = 10


DEFAULT_SIMULATABILITY = SimulatabilityConfig()


@dataclass(frozen=True)
class SimulationResult:
    """One simulatability measurement."""

    mode: str
    series_id: str
    forecaster_id: str
    baseline: str
    surrogate_values: tuple[float, ...]
    reference_values: tuple[float, ...]
    distances: DistanceReport
    run_seed: int
    generator_code: str | None = None

    def __post_init__(self) -> None:
        if len(self.surrogate_values) != len(self.reference_values):
            raise ConfigInvalid("surrogate and reference lengths differ")


@dataclass(frozen=True)
class GeneratorArtifact:
    """LLM-written generator source plus what it actually produced."""

    source_code: str
    requested_length: int
    produced_values: tuple[float, ...]


class GeneratorExecutor(Protocol):
    """Runs generator source and returns the produced sequence.

    Implementations raise ExecutorFailed on any failure (bad code, wrong
    length, non-finite output, timeout, crashed runner).
    """

    def run(self, code: str, length: int, timeout_s: int) -> list[float]: ...


class SubprocessExecutor:
    """Client side of the executor wire protocol.

    Spawns the runner command once per request, writes one JSON document
    {"code", "length", "timeout_s"} to its stdin and reads {"ok": true,
    "values": [...]} or {"ok": false, "error": ...} from its stdout.
    """

    def __init__(self, command: Sequence[str]):
        if not command:
            raise ConfigInvalid("executor command must be non-empty")
        self.command = list(command)

    def run(self, code: str, length: int, timeout_s: int) -> list[float]:
        request = json.dumps({"code": code, "length": length, "timeout_s": timeout_s})
        try:
            proc = subprocess.run(
                self.command,
                input=request.encode("utf-8"),
                capture_output=True,
                timeout=timeout_s + 30,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ExecutorFailed(f"runner did not complete: {exc}") from exc
        if proc.returncode != 0:
            raise ExecutorFailed(
                f"runner exited with status {proc.returncode}: "
                f"{proc.stderr.decode('utf-8', 'replace')[:500]}"
            )
        try:
            response = json.loads(proc.stdout.decode("utf-8"))
        except ValueError as exc:
            raise ExecutorFailed("runner wrote unparseable output") from exc
        if not response.get("ok"):
            raise ExecutorFailed(str(response.get("error", "unknown executor error")))
        return [float(v) for v in response["values"]]


def build_generator_prompt(explanation: Explanation, total_length: int, horizon: int) -> str:
    """Prompt asking for a `generate_series` function matching the explanation."""
    return prompts.render(
        "series_generator",
        forecast_horizon=str(horizon),
        timeseries_size=str(total_length),
        forecast_explanation=explanation.text,
    )


def extract_generator_code(completion: str) -> str:
    """Contents of the first <generator> region, unwrapping a fenced code
    block when present."""
    match = _GENERATOR_RE.search(completion)
    if match is None:
        raise NoGeneratorTag("completion contains no <generator> region")
    region = match.group(1)
    fenced = _FENCE_RE.search(region)
    code = (fenced.group(1) if fenced else region).strip()
    if not code:
        raise EmptyCode("generator region is empty")
    return code


def _simulation_result(
    mode: str,
    series_id: str,
    forecaster_id: str,
    baseline: str,
    reference: Sequence[float],
    simulated: Sequence[float],
    seed: int,
    generator_code: str | None = None,
) -> SimulationResult:
    return SimulationResult(
        mode=mode,
        series_id=series_id,
        forecaster_id=forecaster_id,
        baseline=baseline,
        surrogate_values=tuple(simulated),
        reference_values=tuple(reference),
        distances=distance_report(reference, simulated),
        run_seed=seed,
        generator_code=generator_code,
    )


def _explained_simulation(
    series: TimeSeries,
    explained_forecast,
    spec: ForecasterSpec,
    horizon: int,
    endpoints: EndpointRoles,
    seed: int,
    gateway: LLMGateway,
    config: SimulatabilityConfig,
) -> tuple[Explanation, str, tuple[float, ...]]:
    """Shared explanation -> tip -> with-tip simulation path."""
    importance = occlusion_importance(spec, series, horizon)
    explanation = generate_explanation(
        series, explained_forecast, importance,
        endpoints.explainer, seed, gateway, config.explainer,
    )
    tip = make_forecast_tip(explanation, endpoints.tip_endpoint, gateway, seed)
    simulated = simulate_with_tip(
        series, horizon, tip, endpoints.surrogate, seed, gateway, config.surrogate
    )
    return explanation, tip, simulated.values


def direct_simulatability(
    series: TimeSeries,
    spec: ForecasterSpec,
    horizon: int,
    baseline: str,
    endpoints: EndpointRoles,
    seed: int,
    gateway: LLMGateway,
    config: SimulatabilityConfig = DEFAULT_SIMULATABILITY,
) -> SimulationResult:
    """Evaluate one baseline on the original series.

    The reference is always the true black-box forecast; only what the
    surrogate is shown varies by baseline.
    """
    if baseline not in BASELINES:
        raise ConfigInvalid(f"unknown baseline {baseline!r}")
    reference = forecast(spec, series, horizon)

    if baseline == BASELINE_PLAIN:
        simulated = simulate_plain(
            series, horizon, endpoints.surrogate, seed, gateway, config.surrogate
        ).values
    elif baseline == BASELINE_MONOTONE:
        simulated = simulate_monotone(
            series, horizon, endpoints.surrogate, seed, gateway, config.surrogate
        ).values
    else:
        explained = (
            reference
            if baseline == BASELINE_EXPLAINED
            else random_forecast(series, horizon, seed)
        )
        _, _, simulated = _explained_simulation(
            series, explained, spec, horizon, endpoints, seed, gateway, config
        )

    return _simulation_result(
        MODE_DIRECT, series.id, spec.id, baseline, reference.values, simulated, seed
    )


def _generate_synthetic_series(
    explanation: Explanation,
    total_length: int,
    horizon: int,
    endpoints: EndpointRoles,
    executor: GeneratorExecutor,
    seed: int,
    gateway: LLMGateway,
    config: SimulatabilityConfig,
) -> GeneratorArtifact:
    """Codegen + execution with stateless retries under fresh seeds."""
    prompt = build_generator_prompt(explanation, total_length, horizon)
    last_error: Exception | None = None
    for attempt in range(config.codegen_retries):
        request = gateway.request(
            endpoints.codegen_endpoint, prompt, seed=seed + _CODEGEN_SEED_STEP * attempt
        )
        try:
            code = extract_generator_code(gateway.complete(request))
            values = executor.run(code, total_length, config.executor_timeout_s)
            if len(values) != total_length:
                raise ExecutorFailed(
                    f"executor returned {len(values)} values, wanted {total_length}"
                )
            if not all(math.isfinite(v) for v in values):
                raise NonFiniteSeries("generated series contains non-finite values")
            return GeneratorArtifact(
                source_code=code,
                requested_length=total_length,
                produced_values=tuple(values),
            )
        except (NoGeneratorTag, EmptyCode, ExecutorFailed, NonFiniteSeries) as exc:
            last_error = exc
    raise CodegenFailed(
        f"no usable generator after {config.codegen_retries} attempts: {last_error}"
    ) from last_error


def synthetic_simulatability(
    series: TimeSeries,
    spec: ForecasterSpec,
    horizon: int,
    endpoints: EndpointRoles,
    executor: GeneratorExecutor,
    seed: int,
    gateway: LLMGateway,
    config: SimulatabilityConfig = DEFAULT_SIMULATABILITY,
) -> tuple[SimulationResult, SimulationResult]:
    """Evaluate how well the explanation generalizes to a generated series.

    Returns the (plain, with-tip) result pair on the synthetic series, from
    which the normalized score is formed.  Both simulations run under the
    same seed.
    """
    original_forecast = forecast(spec, series, horizon)
    importance = occlusion_importance(spec, series, horizon)
    explanation = generate_explanation(
        series, original_forecast, importance,
        endpoints.explainer, seed, gateway, config.explainer,
    )

    total_length = config.synthetic_total_length or (len(series) + horizon)
    artifact = _generate_synthetic_series(
        explanation, total_length, horizon, endpoints, executor, seed, gateway, config
    )
    synthetic = TimeSeries(
        id=f"{series.id}::synthetic",
        values=artifact.produced_values,
        frequency=series.frequency,
        source="generated",
    )

    new_reference = forecast(spec, synthetic, horizon)
    plain = simulate_plain(
        synthetic, horizon, endpoints.surrogate, seed, gateway, config.surrogate
    )
    tip = make_forecast_tip(explanation, endpoints.tip_endpoint, gateway, seed)
    with_tip = simulate_with_tip(
        synthetic, horizon, tip, endpoints.surrogate, seed, gateway, config.surrogate
    )

    return (
        _simulation_result(
            MODE_SYNTHETIC, series.id, spec.id, BASELINE_PLAIN,
            new_reference.values, plain.values, seed, artifact.source_code,
        ),
        _simulation_result(
            MODE_SYNTHETIC, series.id, spec.id, BASELINE_EXPLAINED,
            new_reference.values, with_tip.values, seed, artifact.source_code,
        ),
    )


def synthetic_score_pair(results: tuple[SimulationResult, SimulationResult]) -> float:
    """Normalized synthetic score from a (plain, with-tip) result pair."""
    plain, with_tip = results
    return normalized_synthetic_score(with_tip.distances.smape, plain.distances.smape)


USEFUL = "useful"
NOT_USEFUL = "not_useful"
DISAGREE = "disagree"


def classify_usefulness(ds_with: float, ds_without: float, nss: float) -> str:
    """Combine the two metrics' votes on whether an explanation helped."""
    if not 0.0 <= nss <= 1.0:
        raise ConfigInvalid(f"nss must be in [0, 1], got {nss}")
    direct_vote = ds_with < ds_without
    synthetic_vote = nss < 0.5
    if direct_vote and synthetic_vote:
        return USEFUL
    if not direct_vote and not synthetic_vote:
        return NOT_USEFUL
    return DISAGREE
