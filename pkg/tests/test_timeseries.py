from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlesim.errors import EmptySeries, InsufficientNumbers, InvalidRange, NonFinite
from nlesim.timeseries import (
    Segment,
    Segmentation,
    SegmentationConfig,
    TimeSeries,
    detect_seasonality,
    encode_series_text,
    parse_series_text,
    render_segment_summary,
    sample_autocorrelation,
    segment_series,
    segment_stats,
)


def series(values, sid="s") -> TimeSeries:
    return TimeSeries(id=sid, values=tuple(values), frequency="yearly", source="test")


# --- independent oracles ------------------------------------------------------


def ols_oracle(values) -> tuple[float, float]:
    """Closed-form OLS over (local index, value), independent of the package."""
    x = np.arange(len(values), dtype=float)
    y = np.asarray(values, dtype=float)
    xb, yb = x.mean(), y.mean()
    denom = float(((x - xb) ** 2).sum())
    slope = float(((x - xb) * (y - yb)).sum()) / denom if denom else 0.0
    return slope, yb - slope * xb


def sse_oracle(values) -> float:
    slope, intercept = ols_oracle(values)
    x = np.arange(len(values), dtype=float)
    return float(((np.asarray(values, float) - (slope * x + intercept)) ** 2).sum())


def acf_oracle(values, lag) -> float:
    v = np.asarray(values, dtype=float)
    d = v - v.mean()
    denom = float((d * d).sum())
    return float((d[:-lag] * d[lag:]).sum()) / denom if denom else 0.0


def best_single_breakpoint(values, min_len=3) -> tuple[float, list[int]]:
    """Exhaustive optimal two-piece residual and its optimal breakpoints."""
    n = len(values)
    options = {b: sse_oracle(values[:b]) + sse_oracle(values[b:]) for b in range(min_len, n - min_len + 1)}
    best = min(options.values())
    return best, [b for b, v in options.items() if v == best]


# --- domain types --------------------------------------------------------------


def test_timeseries_rejects_empty_and_nonfinite():
    with pytest.raises(EmptySeries):
        TimeSeries(id="x", values=())
    with pytest.raises(NonFinite):
        TimeSeries(id="x", values=(1.0, float("nan")))
    with pytest.raises(NonFinite):
        TimeSeries(id="x", values=(1.0, float("inf")))


def test_segmentation_contiguity_enforced():
    seg = lambda a, b: Segment(a, b, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(InvalidRange):
        Segmentation(series_id="s", segments=(seg(0, 3), seg(4, 6)), residual=0.0)
    with pytest.raises(InvalidRange):
        Segmentation(series_id="s", segments=(seg(1, 3),), residual=0.0)


# --- segment_stats --------------------------------------------------------------


def test_segment_stats_constant():
    seg = segment_stats(series([2, 2, 2]), 0, 3)
    assert seg.mean == 2.0
    assert seg.std == 0.0
    assert seg.slope == 0.0


def test_segment_stats_exact_line_through_origin():
    seg = segment_stats(series([0, 2, 4]), 0, 3)
    assert seg.slope == pytest.approx(2.0, abs=1e-12)
    assert seg.intercept == pytest.approx(0.0, abs=1e-12)
    assert seg.mean == pytest.approx(2.0)


def test_segment_stats_hand_ols():
    # Oracle: slope = sum((x-xb)(y-yb)) / sum((x-xb)^2) = 4/5 on [1,3,2,4].
    assert ols_oracle([1, 3, 2, 4])[0] == pytest.approx(0.8)
    seg = segment_stats(series([1, 3, 2, 4]), 0, 4)
    assert seg.slope == pytest.approx(0.8, rel=1e-12)
    assert seg.mean == pytest.approx(2.5)


def test_segment_stats_invalid_range():
    with pytest.raises(InvalidRange):
        segment_stats(series([1, 2, 3]), 2, 2)
    with pytest.raises(InvalidRange):
        segment_stats(series([1, 2, 3]), 0, 4)


def test_segment_stats_matches_ols_oracle_randomized():
    rng = np.random.default_rng(7)
    for _ in range(50):
        values = rng.normal(size=rng.integers(2, 30)) * 100
        s = series(values)
        seg = segment_stats(s, 0, len(values))
        slope, intercept = ols_oracle(values)
        scale = max(1.0, abs(slope))
        assert abs(seg.slope - slope) / scale < 1e-9
        assert abs(seg.intercept - intercept) / max(1.0, abs(intercept)) < 1e-9


# --- seasonality -----------------------------------------------------------------


def test_detect_seasonality_exact_alternation():
    assert detect_seasonality([1, -1, 1, -1, 1, -1, 1, -1], max_period=4) == 2


def test_detect_seasonality_zero_variance_absent():
    assert detect_seasonality([3, 3, 3, 3, 3, 3], max_period=3) is None


def test_detect_seasonality_sin_like_period_four():
    values = [0, 1, 0, -1, 0, 1, 0, -1, 0, 1, 0, -1]
    # Oracle: lag-4 ACF is the maximum over lags 2..6 and exceeds 0.5.
    acfs = {lag: acf_oracle(values, lag) for lag in range(2, 7)}
    assert max(acfs, key=acfs.get) == 4
    assert acfs[4] == pytest.approx(2 / 3)
    assert detect_seasonality(values, max_period=6) == 4


def test_detect_seasonality_tie_breaks_to_smaller_lag():
    # Period-2 alternation has equal ACF at lags 2 and 4 on long input.
    values = [1.0, -1.0] * 20
    assert acf_oracle(values, 2) == pytest.approx(acf_oracle(values, 4), abs=0.06)
    assert detect_seasonality(values, max_period=4) == 2


def test_sample_autocorrelation_agrees_with_oracle():
    rng = np.random.default_rng(3)
    values = rng.normal(size=40)
    for lag in (1, 2, 5, 10):
        assert sample_autocorrelation(values, lag) == pytest.approx(
            acf_oracle(values, lag), abs=1e-12
        )


# --- segment_series ----------------------------------------------------------------


def test_segment_series_exact_line_single_segment():
    seg = segment_series(series([1, 2, 3, 4, 5, 6]))
    assert len(seg.segments) == 1
    assert seg.segments[0].slope == pytest.approx(1.0, abs=1e-12)
    assert seg.residual == pytest.approx(0.0, abs=1e-12)


def test_segment_series_constant_single_segment():
    seg = segment_series(series([5, 5, 5, 5, 5]))
    assert len(seg.segments) == 1
    assert seg.segments[0].slope == 0.0
    assert seg.segments[0].std == 0.0


def test_segment_series_two_piece_recovers_breakpoint():
    values = [0, 1, 2, 3, 4, 5, 4, 3, 2, 1, 0, -1]
    best, optimal_breaks = best_single_breakpoint(values)
    assert best == pytest.approx(0.0, abs=1e-12)
    assert optimal_breaks == [5, 6]

    seg = segment_series(series(values))
    assert len(seg.segments) == 2
    breakpoint = seg.segments[0].end
    assert min(abs(breakpoint - b) for b in optimal_breaks) <= 1
    assert seg.segments[0].slope == pytest.approx(1.0, abs=1e-9)
    assert seg.segments[1].slope == pytest.approx(-1.0, abs=1e-9)


def test_segment_series_partition_invariant_random():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(3, 60))
        values = rng.normal(size=n) * float(rng.uniform(0.1, 100))
        if rng.uniform() < 0.3:
            values = values + np.linspace(0, rng.uniform(-50, 50), n)
        seg = segment_series(series(values))
        assert seg.segments[0].start == 0
        assert seg.segments[-1].end == n
        for a, b in zip(seg.segments, seg.segments[1:]):
            assert a.end == b.start
        assert seg.residual >= 0.0


def test_segment_series_respects_min_length():
    rng = np.random.default_rng(5)
    config = SegmentationConfig(min_segment_length=4)
    values = rng.normal(size=30)
    seg = segment_series(series(values), config)
    assert all(s.end - s.start >= 4 for s in seg.segments)


def test_segment_series_short_series_single_segment():
    seg = segment_series(series([1.0, 9.0]))
    assert len(seg.segments) == 1
    assert (seg.segments[0].start, seg.segments[0].end) == (0, 2)


def test_segment_series_brute_force_residual_bound():
    # For short series the greedy residual must come within 5% of the
    # exhaustive one-breakpoint optimum (or one segment, whichever is less).
    rng = np.random.default_rng(23)
    for _ in range(40):
        n = int(rng.integers(6, 21))
        values = list(rng.normal(size=n) * 10 + np.linspace(0, rng.uniform(-20, 20), n))
        seg = segment_series(series(values))
        if len(seg.segments) > 2:
            continue
        best_two, _ = best_single_breakpoint(values)
        best = min(best_two, sse_oracle(values))
        assert seg.residual <= best * 1.05 + 1e-9


def test_segment_series_determinism():
    rng = np.random.default_rng(2)
    values = rng.normal(size=25)
    a = segment_series(series(values))
    b = segment_series(series(values))
    assert a == b
    assert render_segment_summary(a) == render_segment_summary(b)


# --- summary rendering ---------------------------------------------------------------


def test_render_summary_single_segment_exact_text():
    seg = Segmentation(
        series_id="s",
        segments=(Segment(start=0, end=5, slope=0.0, intercept=2.0, mean=2.0, std=0.0),),
        residual=0.0,
    )
    assert render_segment_summary(seg) == (
        "There are 1 segments in the time series\n"
        "1. Segment 1 starts at index 0, ends at index 5. "
        "The mean is 2.00 the std is 0.00 and the slope in this segment is 0.00."
    )


def test_render_summary_two_segments_numbered():
    seg = Segmentation(
        series_id="s",
        segments=(
            Segment(0, 3, 1.0, 0.0, 1.0, 0.5),
            Segment(3, 6, -1.0, 5.0, 4.0, 0.5),
        ),
        residual=0.1,
    )
    text = render_segment_summary(seg)
    lines = text.split("\n")
    assert lines[0] == "There are 2 segments in the time series"
    assert lines[1].startswith("1. Segment 1 starts at index 0, ends at index 3.")
    assert lines[2].startswith("2. Segment 2 starts at index 3, ends at index 6.")


def test_render_summary_seasonality_sentence():
    seg = Segmentation(
        series_id="s",
        segments=(Segment(0, 8, 0.0, 0.0, 0.0, 1.0, seasonality_period=4),),
        residual=0.0,
    )
    assert render_segment_summary(seg).endswith("It repeats itself every 4 predictions.")


# --- encoding ------------------------------------------------------------------------


def test_encode_basic():
    assert encode_series_text([1.0, 2.5], 2) == "1.00, 2.50"


def test_encode_empty():
    assert encode_series_text([], 2) == ""


def test_encode_rounds_half_up():
    assert encode_series_text([3.14159], 3) == "3.142"
    assert encode_series_text([2.5], 0) == "3"
    assert encode_series_text([1.005], 2) == "1.01"


def test_encode_rejects_nonfinite():
    with pytest.raises(NonFinite):
        encode_series_text([float("nan")], 2)


def test_parse_basic():
    assert parse_series_text("1.2, 3.4, 5.6", 3) == [1.2, 3.4, 5.6]


def test_parse_skips_preamble():
    assert parse_series_text("The next terms are: 10, 20", 2) == [10.0, 20.0]


def test_parse_scientific_and_sign():
    assert parse_series_text("-1.5e2 then +.25", 2) == [-150.0, 0.25]


def test_parse_insufficient():
    with pytest.raises(InsufficientNumbers):
        parse_series_text("only 7 here", 3)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
        min_size=1,
        max_size=12,
    ),
    st.integers(min_value=0, max_value=6),
)
def test_encode_parse_round_trip(values, precision):
    text = encode_series_text(values, precision)
    parsed = parse_series_text(text, len(values))
    for original, got in zip(values, parsed):
        assert abs(got - original) <= 0.5 * 10 ** (-precision) + 1e-9


def test_parse_of_high_precision_encode_is_exact():
    rng = np.random.default_rng(1)
    values = list(rng.uniform(1, 500, size=20))
    parsed = parse_series_text(encode_series_text(values, 17), 20)
    assert parsed == values
