"""Fully offline evaluation setup.

Deterministic fixture series plus oracle scripted backends that reproduce
the qualitative sanity ordering without any network access: the explainer
double embeds the forecast it was shown into its explanation, the tip and
with-tip doubles echo those numbers onward (so the explained baseline
simulates the black-box forecast exactly), the plain double continues the
sequence at a deliberate offset, and the monotone double answers all zeros.

Encoding runs at 17 decimal places here so every echoed value round-trips
bit-exactly through the prompt text.
"""

from __future__ import annotations

import re

import numpy as np

from .datasets import DatasetConfig
from .explainer import ExplainerConfig
from .forecasters import ForecasterSpec
from .gateway import ChatRequest, GenerationParams, LLMGateway
from .harness import RunConfig
from .simulatability import BASELINES, EndpointRoles, SimulatabilityConfig
from .surrogate import SurrogateConfig
from .timeseries import TimeSeries

HERMETIC_PRECISION = 17
HERMETIC_DATASET = "fixtures"

_HORIZON_RE = re.compile(r"for (\d+) steps")
_SIZE_RE = re.compile(r"sequence of size (\d+) ")
_FORECAST_SLOT_RE = re.compile(
    r"Here is the forecasted data for the next \d+ time steps:\n\n(.*?)"
    r"\n\nHere is a preanalysis of the forecast:",
    re.DOTALL,
)
_TIP_REGION_RE = re.compile(
    r"Forecast Tip:\n\n(.*?)\n\nPlease continue the sequence", re.DOTALL
)


def make_fixture_series(count: int = 10, length: int = 20, seed: int = 20240731) -> list[TimeSeries]:
    """Strictly positive synthetic yearly series with varied trend, wiggle
    and noise; fully determined by the seed."""
    rng = np.random.default_rng(seed)
    out = []
    t = np.arange(length, dtype=float)
    for i in range(count):
        base = 60.0 + 30.0 * i
        trend = (i - count / 2) * 0.5
        period = 3 + (i % 4)
        wiggle = 0.08 * base * np.sin(2 * np.pi * t / period)
        noise = 0.03 * base * rng.standard_normal(length)
        values = base + trend * t + wiggle + noise
        assert values.min() > 0, "fixture construction must stay positive"
        out.append(
            TimeSeries(
                id=f"fixture_{i:02d}",
                values=tuple(float(v) for v in values),
                frequency="yearly",
                source=HERMETIC_DATASET,
            )
        )
    return out


_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def _all_numbers(text: str) -> list[float]:
    return [float(tok) for tok in _NUMBER_RE.findall(text)]


def _join(values: list[float]) -> str:
    return ", ".join(repr(v) for v in values)


def _horizon_of(request: ChatRequest) -> int:
    match = _HORIZON_RE.search(request.user)
    if match is None:
        raise AssertionError("prompt does not state a horizon")
    return int(match.group(1))


def _sequence_of(request: ChatRequest) -> list[float]:
    _, _, tail = request.user.rpartition("Sequence:")
    return _all_numbers(tail)


def _plain_response(request: ChatRequest) -> str:
    # Deliberately mediocre continuation: last value plus a visible offset,
    # so no built-in forecaster is simulated exactly.
    history = _sequence_of(request)
    offset = 0.1 * (max(history) - min(history)) + 1.0
    return _join([history[-1] + offset] * _horizon_of(request))


def _monotone_response(request: ChatRequest) -> str:
    return _join([0.0] * _horizon_of(request))


def _with_tip_response(request: ChatRequest) -> str:
    match = _TIP_REGION_RE.search(request.user)
    if match is None:
        raise AssertionError("with-tip prompt has no tip region")
    return _join(_all_numbers(match.group(1)))


def _tip_response(request: ChatRequest) -> str:
    _, _, paragraph = request.user.partition("Here is the paragraph:")
    numbers = _all_numbers(paragraph)
    return (
        "When forecasting this series, expect the next values to be "
        f"{_join(numbers)}. Follow them closely."
    )


def _forecast_explanation_response(request: ChatRequest) -> str:
    match = _FORECAST_SLOT_RE.search(request.user)
    if match is None:
        raise AssertionError("explanation prompt has no forecasted-data slot")
    numbers = _all_numbers(match.group(1))
    return (
        "The series continues its established behaviour; the forecast "
        f"proceeds with the values {_join(numbers)} over the horizon."
    )


def _generator_response(request: ChatRequest) -> str:
    match = _SIZE_RE.search(request.user)
    if match is None:
        raise AssertionError("generator prompt has no size slot")
    size = int(match.group(1))
    code = (
        "import numpy as np\n\n"
        "def generate_series():\n"
        f"    return np.arange(1.0, {size + 1}.0)\n"
    )
    return f"Here you go.\n<generator>```python\n{code}```</generator>"


def register_oracle_endpoints(gateway: LLMGateway) -> EndpointRoles:
    """Register the scripted surrogate and explainer doubles; patterns are
    ordered so the most specific template marker wins."""
    surrogate_id = gateway.register_scripted_backend(
        {
            "Forecast Tip:": _with_tip_response,
            "predict a constant value for all steps": _monotone_response,
            "recommendation to a another user": _tip_response,
            "delimit your code with the XML tag": _generator_response,
            "continue the given sequence": _plain_response,
        },
        endpoint_id="scripted-surrogate",
        default_params=GenerationParams(temperature=1.0),
    )
    explainer_id = gateway.register_scripted_backend(
        {
            "Here is an individual analysis of each segment:": (
                "The segments describe a steadily evolving series with mild "
                "cyclic movement and a persistent overall trend."
            ),
            "Here is the analysis for all segments:": (
                "The history shows a stable structure whose level and trend "
                "carry forward; recent behaviour is the best guide."
            ),
            "Here is a preanalysis of the forecast:": _forecast_explanation_response,
        },
        endpoint_id="scripted-explainer",
        default_params=GenerationParams(
            temperature=0.9, top_p=0.9, repetition_penalty=1.1
        ),
    )
    return EndpointRoles(surrogate=surrogate_id, explainer=explainer_id)


def hermetic_simulatability_config() -> SimulatabilityConfig:
    return SimulatabilityConfig(
        explainer=ExplainerConfig(encoding_precision=HERMETIC_PRECISION),
        surrogate=SurrogateConfig(encoding_precision=HERMETIC_PRECISION),
    )


def hermetic_forecasters() -> tuple[ForecasterSpec, ...]:
    return (
        ForecasterSpec(id="naive", kind="naive"),
        ForecasterSpec(id="drift", kind="drift"),
        ForecasterSpec(id="ses", kind="ses", params={"alpha": 0.5}),
        ForecasterSpec(id="ar2", kind="ar", params={"order": 2}),
    )


def hermetic_eval_sets(
    horizon: int = 6, count: int = 10, length: int = 20
) -> dict[str, list[tuple[TimeSeries, tuple[float, ...]]]]:
    """Fixture series pre-split like a parsed dataset would be."""
    split = []
    for s in make_fixture_series(count=count, length=length + horizon):
        history = TimeSeries(
            id=s.id, values=s.values[:-horizon], frequency=s.frequency, source=s.source
        )
        split.append((history, s.values[-horizon:]))
    return {HERMETIC_DATASET: split}


def hermetic_run_config(
    output_dir: str,
    endpoints: EndpointRoles,
    horizon: int = 6,
    runs: int = 3,
    synthetic: bool = False,
    baselines: tuple[str, ...] = BASELINES,
) -> RunConfig:
    return RunConfig(
        datasets=(
            DatasetConfig(
                name=HERMETIC_DATASET,
                path="<builtin>",
                frequency_filter="yearly",
                horizon=horizon,
            ),
        ),
        forecasters=hermetic_forecasters(),
        baselines=baselines,
        endpoints=endpoints,
        seeds=tuple(101 + 7 * r for r in range(runs)),
        output_dir=output_dir,
        runs=runs,
        parallelism=4,
        synthetic=synthetic,
        simulatability=hermetic_simulatability_config(),
    )
