"""Univariate time-series representation, slope-change segmentation and the
text encoding used to exchange series with language models.

Series are immutable value tuples with identity metadata.  Segmentation is a
greedy bottom-up merge over least-squares line fits: start from minimal
contiguous blocks and keep merging the adjacent pair whose merged fit stays
below a scale-free residual threshold.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .errors import EmptySeries, InsufficientNumbers, InvalidRange, NonFinite

FREQ_YEARLY = "yearly"
FREQ_QUARTERLY = "quarterly"
FREQ_MONTHLY = "monthly"

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def _check_finite(values: Sequence[float], what: str = "series") -> None:
    if any(not math.isfinite(v) for v in values):
        raise NonFinite(f"{what} contains non-finite values")


@dataclass(frozen=True)
class TimeSeries:
    """A univariate sequence of finite reals with identity and frequency metadata."""

    id: str
    values: tuple[float, ...]
    frequency: str = "other"
    source: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) == 0:
            raise EmptySeries(f"series {self.id!r} has no values")
        _check_finite(self.values, f"series {self.id!r}")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ForecastWindow:
    """A horizon-k forecast attached to the history it extends."""

    history_id: str
    horizon: int
    values: tuple[float, ...]
    forecaster_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.horizon < 1:
            raise InvalidRange(f"horizon must be positive, got {self.horizon}")
        if len(self.values) != self.horizon:
            raise InvalidRange(
                f"forecast for {self.history_id!r} has {len(self.values)} values, "
                f"expected horizon {self.horizon}"
            )
        _check_finite(self.values, f"forecast for {self.history_id!r}")


@dataclass(frozen=True)
class Segment:
    """One contiguous piece of a series with its line fit and statistics.

    start is inclusive, end exclusive; slope/intercept are the least-squares
    line over local indices 0..(end-start-1).
    """

    start: int
    end: int
    slope: float
    intercept: float
    mean: float
    std: float
    seasonality_period: int | None = None


@dataclass(frozen=True)
class Segmentation:
    """Contiguous, non-overlapping segments tiling [0, series length)."""

    series_id: str
    segments: tuple[Segment, ...]
    residual: float

    def __post_init__(self) -> None:
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise EmptySeries("segmentation must contain at least one segment")
        if segs[0].start != 0:
            raise InvalidRange("first segment must start at index 0")
        for a, b in zip(segs, segs[1:]):
            if a.end != b.start:
                raise InvalidRange(f"segments not contiguous at index {a.end}")


@dataclass(frozen=True)
class SegmentationConfig:
    """Knobs for segment_series and per-segment statistics.

    residual_threshold is a fraction of the whole-series population variance,
    so the merge criterion is scale-free.
    """

    min_segment_length: int = 3
    residual_threshold: float = 0.05
    seasonality_min_acf: float = 0.5
    max_seasonality_period: int = 12


DEFAULT_SEGMENTATION = SegmentationConfig()


def _ols_line(values: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept over local indices; a single point
    gets slope 0 and intercept equal to its value."""
    n = len(values)
    x = np.arange(n, dtype=float)
    x_mean = x.mean()
    y_mean = float(values.mean())
    denom = float(((x - x_mean) ** 2).sum())
    if denom == 0.0:
        return 0.0, y_mean
    slope = float(((x - x_mean) * (values - y_mean)).sum()) / denom
    return slope, y_mean - slope * x_mean


def _fit_sse(values: np.ndarray) -> float:
    """Sum of squared residuals of the OLS line over the given values."""
    slope, intercept = _ols_line(values)
    x = np.arange(len(values), dtype=float)
    resid = values - (slope * x + intercept)
    return float((resid * resid).sum())


def sample_autocorrelation(values: Sequence[float], lag: int) -> float:
    """Sample ACF at the given lag; 0.0 for degenerate (zero-variance) input."""
    v = np.asarray(values, dtype=float)
    if lag <= 0 or lag >= len(v):
        raise InvalidRange(f"lag {lag} outside (0, {len(v)})")
    centered = v - v.mean()
    denom = float((centered * centered).sum())
    if denom == 0.0:
        return 0.0
    return float((centered[:-lag] * centered[lag:]).sum()) / denom


def detect_seasonality(
    values: Sequence[float],
    max_period: int,
    min_acf: float = DEFAULT_SEGMENTATION.seasonality_min_acf,
) -> int | None:
    """Lag in [2, max_period] with the highest sample autocorrelation,
    provided it reaches min_acf; ties broken toward the smaller lag.

    Returns None on degenerate input (fewer than 4 points, zero variance, or
    no lag reaching the floor).
    """
    n = len(values)
    if n < 4:
        return None
    best_lag: int | None = None
    best_acf = -math.inf
    for lag in range(2, min(max_period, n - 1) + 1):
        acf = sample_autocorrelation(values, lag)
        if acf > best_acf:
            best_acf = acf
            best_lag = lag
    if best_lag is None or best_acf < min_acf:
        return None
    return best_lag


def segment_stats(
    series: TimeSeries,
    start: int,
    end: int,
    config: SegmentationConfig = DEFAULT_SEGMENTATION,
) -> Segment:
    """Mean, population std, OLS line and detected seasonality for values[start:end)."""
    if start < 0 or start >= end or end > len(series):
        raise InvalidRange(f"invalid segment range [{start}, {end}) for length {len(series)}")
    v = np.asarray(series.values[start:end], dtype=float)
    slope, intercept = _ols_line(v)
    period = detect_seasonality(
        v, config.max_seasonality_period, config.seasonality_min_acf
    )
    return Segment(
        start=start,
        end=end,
        slope=slope,
        intercept=intercept,
        mean=float(v.mean()),
        std=float(v.std()),
        seasonality_period=period,
    )


def segment_series(
    series: TimeSeries,
    config: SegmentationConfig = DEFAULT_SEGMENTATION,
) -> Segmentation:
    """Split a series where the fitted slope changes.

    Greedy bottom-up merge: start from contiguous blocks of
    min_segment_length (the last block absorbs the remainder), then
    repeatedly merge the adjacent pair whose merged line fit has the smallest
    per-point mean squared residual, as long as that residual stays within
    residual_threshold x series variance.  Deterministic; ties merge the
    leftmost pair.
    """
    n = len(series)
    values = np.asarray(series.values, dtype=float)
    m = config.min_segment_length

    # Initial minimal blocks. Series shorter than two blocks collapse to one.
    if n < 2 * m:
        boundaries = [0, n]
    else:
        starts = list(range(0, n, m))
        # A tail shorter than one block is absorbed by the previous block.
        if n - starts[-1] < m:
            starts.pop()
        boundaries = starts + [n]

    variance = float(values.var())
    threshold = config.residual_threshold * variance

    def merged_mse(i: int) -> float:
        block = values[boundaries[i] : boundaries[i + 2]]
        return _fit_sse(block) / len(block)

    while len(boundaries) > 2:
        candidates = [(merged_mse(i), i) for i in range(len(boundaries) - 2)]
        best_mse, best_i = min(candidates)
        if best_mse > threshold:
            break
        del boundaries[best_i + 1]

    def compliant(block: np.ndarray) -> bool:
        # Per-point fit error within threshold, or too short to split anyway.
        return len(block) < 2 * m or _fit_sse(block) / len(block) <= threshold

    # Merge order fixes the number of segments but can misplace boundaries on
    # noisy data; slide each interior boundary to the position minimizing the
    # adjacent pair's squared error, among positions keeping both sides
    # compliant.  With two segments this reaches the exhaustive optimum.
    for _ in range(len(boundaries)):
        moved = False
        for j in range(1, len(boundaries) - 1):
            lo, hi = boundaries[j - 1], boundaries[j + 1]
            best_b = boundaries[j]
            best_sse = _fit_sse(values[lo:best_b]) + _fit_sse(values[best_b:hi])
            for b in range(lo + m, hi - m + 1):
                left, right = values[lo:b], values[b:hi]
                if not (compliant(left) and compliant(right)):
                    continue
                sse = _fit_sse(left) + _fit_sse(right)
                if sse < best_sse - 1e-12:
                    best_b, best_sse = b, sse
            if best_b != boundaries[j]:
                boundaries[j] = best_b
                moved = True
        if not moved:
            break

    segments = tuple(
        segment_stats(series, boundaries[i], boundaries[i + 1], config)
        for i in range(len(boundaries) - 1)
    )
    residual = sum(
        _fit_sse(values[s.start : s.end]) for s in segments
    )
    return Segmentation(series_id=series.id, segments=segments, residual=residual)


def render_segment_summary(segmentation: Segmentation) -> str:
    """The templated per-segment summary fed to the segment-analysis prompt.

    One numbered line per segment; the seasonality sentence is omitted when
    no period was detected.
    """
    if not segmentation.segments:
        raise EmptySeries("cannot summarize an empty segmentation")
    lines = [f"There are {len(segmentation.segments)} segments in the time series"]
    for k, seg in enumerate(segmentation.segments, start=1):
        line = (
            f"{k}. Segment {k} starts at index {seg.start}, ends at index {seg.end}. "
            f"The mean is {seg.mean:.2f} the std is {seg.std:.2f} "
            f"and the slope in this segment is {seg.slope:.2f}."
        )
        if seg.seasonality_period is not None:
            line += f" It repeats itself every {seg.seasonality_period} predictions."
        lines.append(line)
    return "\n".join(lines)


def encode_series_text(values: Sequence[float], precision: int = 2) -> str:
    """Comma-plus-space separated fixed-point rendering, half-up rounding.

    decode(encode(v)) reproduces v up to rounding at the given precision.
    """
    if precision < 0:
        raise InvalidRange(f"precision must be non-negative, got {precision}")
    _check_finite(values, "values to encode")
    quantum = Decimal(1).scaleb(-precision)
    rendered = [
        format(Decimal(repr(float(v))).quantize(quantum, rounding=ROUND_HALF_UP), "f")
        for v in values
    ]
    return ", ".join(rendered)


def parse_series_text(text: str, expected_count: int) -> list[float]:
    """Extract decimal numbers from free text, in order of appearance.

    Models asked to 'just return the numbers' often add prose anyway; pull
    every signed decimal (with optional fraction / scientific notation) and
    return the first expected_count of them.
    """
    if expected_count < 1:
        raise InvalidRange(f"expected_count must be positive, got {expected_count}")
    found = _NUMBER_RE.findall(text)
    if len(found) < expected_count:
        raise InsufficientNumbers(
            f"needed {expected_count} numbers, found {len(found)}"
        )
    return [float(tok) for tok in found[:expected_count]]
