"""Pluggable black-box forecaster abstraction.

Built-in statistical baselines (naive, drift, simple exponential smoothing,
autoregression) keep the full pipeline testable without any heavy model; the
external adapter bridges to real forecaster runtimes over a small HTTP
protocol.  Occlusion importance ranks history indices by how much replacing
them with the history mean moves the forecast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import httpx
import numpy as np

from .errors import (
    ConfigInvalid,
    ExternalUnavailable,
    HistoryTooShort,
    MalformedResponse,
    NonFiniteOutput,
)
from .metrics import smape
from .timeseries import ForecastWindow, TimeSeries

BUILTIN_KINDS = ("naive", "drift", "ses", "ar")


@dataclass(frozen=True)
class ForecasterSpec:
    """Identifies a forecaster and its parameters.

    kind is one of naive | drift | ses | ar | external; ses takes alpha in
    (0, 1], ar takes order >= 1, external takes endpoint (base URL).
    """

    id: str
    kind: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in BUILTIN_KINDS + ("external",):
            raise ConfigInvalid(f"unknown forecaster kind {self.kind!r}")
        if self.kind == "ses":
            alpha = float(self.params.get("alpha", 0.5))
            if not 0.0 < alpha <= 1.0:
                raise ConfigInvalid(f"ses alpha must be in (0, 1], got {alpha}")
        if self.kind == "ar":
            order = int(self.params.get("order", 1))
            if order < 1:
                raise ConfigInvalid(f"ar order must be >= 1, got {order}")
        if self.kind == "external" and not self.params.get("endpoint"):
            raise ConfigInvalid("external forecaster needs an endpoint")


@dataclass(frozen=True)
class ImportanceProfile:
    """Per-history-index sensitivity scores; larger means more important."""

    series_id: str
    scores: tuple[float, ...]

    def top_indices(self, k: int = 3) -> list[int]:
        """Indices of the k largest scores, ties broken toward lower index."""
        order = sorted(range(len(self.scores)), key=lambda i: (-self.scores[i], i))
        return order[:k]


def _forecast_naive(values: np.ndarray, horizon: int) -> np.ndarray:
    return np.repeat(values[-1], horizon)


def _forecast_drift(values: np.ndarray, horizon: int) -> np.ndarray:
    slope = (values[-1] - values[0]) / (len(values) - 1)
    steps = np.arange(1, horizon + 1, dtype=float)
    return values[-1] + slope * steps


def _forecast_ses(values: np.ndarray, horizon: int, alpha: float) -> np.ndarray:
    level = values[0]
    for v in values[1:]:
        level = alpha * v + (1.0 - alpha) * level
    return np.repeat(level, horizon)


def _forecast_ar(values: np.ndarray, horizon: int, order: int) -> np.ndarray:
    if len(values) < order + 1:
        raise HistoryTooShort(
            f"ar({order}) needs at least {order + 1} points, got {len(values)}"
        )
    rows = len(values) - order
    design = np.ones((rows, order + 1))
    for j in range(order):
        design[:, j + 1] = values[j : j + rows]
    targets = values[order:]
    coefs, *_ = np.linalg.lstsq(design, targets, rcond=None)
    window = list(values[-order:])
    out = []
    for _ in range(horizon):
        nxt = coefs[0] + float(np.dot(coefs[1:], window))
        out.append(nxt)
        window = window[1:] + [nxt]
    return np.asarray(out)


def forecast(spec: ForecasterSpec, history: TimeSeries, horizon: int) -> ForecastWindow:
    """Deterministic forecast of the next `horizon` steps.

    naive repeats the last value; drift extrapolates the line through the
    first and last points; ses iterates simple exponential smoothing and
    holds the level; ar fits coefficients by least squares and rolls forward.
    """
    if horizon < 1:
        raise ConfigInvalid(f"horizon must be positive, got {horizon}")
    values = np.asarray(history.values, dtype=float)
    if spec.kind != "external" and len(values) < 2:
        raise HistoryTooShort(f"need at least 2 points, got {len(values)}")

    if spec.kind == "naive":
        out = _forecast_naive(values, horizon)
    elif spec.kind == "drift":
        out = _forecast_drift(values, horizon)
    elif spec.kind == "ses":
        out = _forecast_ses(values, horizon, float(spec.params.get("alpha", 0.5)))
    elif spec.kind == "ar":
        out = _forecast_ar(values, horizon, int(spec.params.get("order", 1)))
    else:
        return external_forecast(
            str(spec.params["endpoint"]),
            history,
            horizon,
            timeout=float(spec.params.get("timeout_s", 30.0)),
            forecaster_id=spec.id,
        )

    if not np.isfinite(out).all():
        raise NonFiniteOutput(f"forecaster {spec.id!r} produced non-finite values")
    return ForecastWindow(
        history_id=history.id,
        horizon=horizon,
        values=tuple(float(v) for v in out),
        forecaster_id=spec.id,
    )


def random_forecast(history: TimeSeries, horizon: int, seed: int) -> ForecastWindow:
    """Seeded i.i.d. uniform draws over [min(history), max(history)]."""
    lo = min(history.values)
    hi = max(history.values)
    rng = np.random.default_rng(seed)
    values = rng.uniform(lo, hi, size=horizon) if hi > lo else np.repeat(lo, horizon)
    return ForecastWindow(
        history_id=history.id,
        horizon=horizon,
        values=tuple(float(v) for v in values),
        forecaster_id="random",
    )


def occlusion_importance(
    spec: ForecasterSpec, history: TimeSeries, horizon: int
) -> ImportanceProfile:
    """Per-index sensitivity: sMAPE between the original forecast and the
    forecast after replacing one history value with the history mean."""
    base = forecast(spec, history, horizon)
    mean = float(np.mean(history.values))
    scores = []
    for t in range(len(history)):
        if history.values[t] == mean:
            scores.append(0.0)
            continue
        occluded_values = list(history.values)
        occluded_values[t] = mean
        occluded = TimeSeries(
            id=history.id, values=tuple(occluded_values),
            frequency=history.frequency, source=history.source,
        )
        scores.append(smape(base.values, forecast(spec, occluded, horizon).values))
    return ImportanceProfile(series_id=history.id, scores=tuple(scores))


_clients: dict[str, httpx.Client] = {}


def _client_for(base_url: str) -> httpx.Client:
    client = _clients.get(base_url)
    if client is None:
        client = httpx.Client(base_url=base_url)
        _clients[base_url] = client
    return client


def external_forecast(
    endpoint: str,
    history: TimeSeries,
    horizon: int,
    timeout: float,
    forecaster_id: str = "external",
) -> ForecastWindow:
    """POST /forecast against an external forecaster and validate the reply.

    Request body: {"history": [...], "horizon": k, "series_id": id}; a 200
    with {"forecast": [...]} of exactly k finite entries is accepted,
    anything else is MalformedResponse / NonFiniteOutput.
    """
    payload = {
        "history": list(history.values),
        "horizon": horizon,
        "series_id": history.id,
    }
    try:
        response = _client_for(endpoint).post("/forecast", json=payload, timeout=timeout)
    except httpx.HTTPError as exc:
        raise ExternalUnavailable(f"endpoint {endpoint!r}: {exc}") from exc
    if response.status_code != 200:
        raise MalformedResponse(f"status {response.status_code} from {endpoint!r}")
    try:
        body = response.json()
        values = [float(v) for v in body["forecast"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedResponse(f"unparseable forecast body from {endpoint!r}") from exc
    if len(values) != horizon:
        raise MalformedResponse(
            f"expected {horizon} values, got {len(values)} from {endpoint!r}"
        )
    if not all(math.isfinite(v) for v in values):
        raise NonFiniteOutput(f"non-finite forecast from {endpoint!r}")
    return ForecastWindow(
        history_id=history.id,
        horizon=horizon,
        values=tuple(values),
        forecaster_id=forecaster_id,
    )
