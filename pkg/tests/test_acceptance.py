"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines.  The live-endpoint ordering check is advisory and only runs when
NLESIM_LIVE_CONFIG points at a run config; it never gates CI.
"""

from __future__ import annotations

import os
import socket
import time

import numpy as np
import pytest

from nlesim.datasets import DatasetConfig, parse_tsf, select_eval_set
from nlesim.gateway import LLMGateway
from nlesim.harness import run_matrix
from nlesim.hermetic import (
    hermetic_eval_sets,
    hermetic_run_config,
    hermetic_simulatability_config,
    register_oracle_endpoints,
)
from nlesim.metrics import (
    cohen_kappa,
    distance_report,
    nmae,
    normalized_synthetic_score,
    nrmse,
    smape,
)
from nlesim.simulatability import (
    BASELINE_EXPLAINED,
    BASELINE_MONOTONE,
    BASELINE_PLAIN,
    BASELINE_RANDOM,
    direct_simulatability,
)
from nlesim.timeseries import TimeSeries, segment_series
from nlesim import prompts

from tests.test_metrics import nmae_oracle, nrmse_oracle, smape_oracle
from tests.test_timeseries import best_single_breakpoint


def _passed(name: str) -> None:
    print(f"[PASS] {name}")


def test_metric_oracle_equivalence():
    rng = np.random.default_rng(20240801)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 17))
        r = rng.uniform(-100, 100, size=n)
        c = rng.uniform(-100, 100, size=n)
        worst = max(
            worst,
            abs(smape(r, c) - smape_oracle(r, c)),
            abs(nmae(r, c) - nmae_oracle(r, c)),
            abs(nrmse(r, c) - nrmse_oracle(r, c)),
        )
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12, f"worst deviation {worst}"
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    _passed(f"metric oracle equivalence (worst |delta| {worst:.1e}, {elapsed * 1000:.0f} ms)")


def test_smape_saturation():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 12))
        reference = rng.uniform(0.001, 1000, size=n)  # strictly positive
        value = smape(reference, np.zeros(n))
        assert abs(value - 2.0) <= 1e-12
    _passed("sMAPE saturation at exactly 2.0 for all-zero candidates")


def test_nss_properties():
    for x in np.linspace(0.01, 50, 100):
        assert normalized_synthetic_score(x, x) == 0.5
    assert normalized_synthetic_score(0.0, 0.3) == 0.0
    grid = [normalized_synthetic_score(x, 0.8) for x in np.linspace(0.0, 10.0, 100)]
    assert all(b > a for a, b in zip(grid, grid[1:]))
    _passed("NSS midpoint / zero / monotonicity properties")


def test_deterministic_sanity_ordering():
    # Hermetic reproduction of the sanity-table shape: the explained
    # baseline simulates every forecaster exactly, the adversarial prompt
    # saturates the metric, and both beat the plain and random baselines.
    gateway = LLMGateway()
    roles = register_oracle_endpoints(gateway)
    config = hermetic_simulatability_config()
    horizon = 6
    eval_sets = hermetic_eval_sets(horizon=horizon, count=10)

    from nlesim.hermetic import hermetic_forecasters

    guard = socket.socket.connect

    def refuse(*args, **kwargs):  # any dial-out fails the criterion
        raise AssertionError("network call during hermetic run")

    socket.socket.connect = refuse
    start = time.perf_counter()
    try:
        for history, _holdout in eval_sets["fixtures"]:
            for spec in hermetic_forecasters():
                scores = {}
                for baseline in (
                    BASELINE_PLAIN, BASELINE_RANDOM, BASELINE_MONOTONE, BASELINE_EXPLAINED
                ):
                    result = direct_simulatability(
                        history, spec, horizon, baseline, roles, 101, gateway, config
                    )
                    scores[baseline] = result.distances.smape
                assert scores[BASELINE_EXPLAINED] == 0.0, (history.id, spec.id)
                assert scores[BASELINE_MONOTONE] == 2.0, (history.id, spec.id)
                assert 0.0 < min(scores[BASELINE_PLAIN], scores[BASELINE_RANDOM]), (
                    history.id, spec.id,
                )
    finally:
        socket.socket.connect = guard
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    _passed(
        "deterministic sanity ordering: DS(E)=0 < min(plain, random), "
        f"DS(M)=2.0, 10 series x 4 forecasters in {elapsed:.1f}s, zero network"
    )


def test_segmentation_criteria():
    rng = np.random.default_rng(515)
    for _ in range(200):
        n = int(rng.integers(3, 50))
        values = rng.normal(size=n) * float(rng.uniform(0.5, 50))
        seg = segment_series(TimeSeries(id="r", values=tuple(values)))
        assert seg.segments[0].start == 0 and seg.segments[-1].end == n
        assert all(a.end == b.start for a, b in zip(seg.segments, seg.segments[1:]))

    two_piece = [0, 1, 2, 3, 4, 5, 4, 3, 2, 1, 0, -1]
    _, optimal = best_single_breakpoint(two_piece)
    seg = segment_series(TimeSeries(id="t", values=tuple(float(v) for v in two_piece)))
    assert len(seg.segments) == 2
    assert min(abs(seg.segments[0].end - b) for b in optimal) <= 1

    constant = segment_series(TimeSeries(id="c", values=(5.0,) * 9))
    linear = segment_series(TimeSeries(id="l", values=tuple(float(v) for v in range(12))))
    assert len(constant.segments) == 1
    assert len(linear.segments) == 1
    _passed("segmentation: partition on 200 random series, two-piece breakpoint, degenerate cases")


def test_prompt_fidelity():
    from pathlib import Path

    template_dir = Path(prompts.__file__).parent
    paper_templates = [
        "llmtime_plain", "llmtime_with_tip", "forecast_tip", "series_generator",
        "segment_analysis", "history_analysis", "forecast_explanation",
    ]
    for name in paper_templates:
        identity = {slot: "{" + slot + "}" for slot in prompts.slots(name)}
        rendered = prompts.render(name, **identity)
        stored = (template_dir / f"{name}.txt").read_text(encoding="utf-8").removesuffix("\n")
        assert rendered == stored, name
    _passed(f"prompt fidelity: {len(paper_templates)} templates byte-identical to fixtures")


def test_kappa_unit_values():
    assert cohen_kappa([0, 1, 1, 0], [0, 1, 1, 0]) == 1.0
    balanced_a = [0] * 10 + [1] * 10
    balanced_b = [0] * 5 + [1] * 5 + [0] * 5 + [1] * 5
    assert cohen_kappa(balanced_a, balanced_b) == pytest.approx(0.0, abs=1e-12)
    a = [0] * 8 + [1] * 12
    b = [0] * 6 + [1] * 2 + [0] * 1 + [1] * 11
    assert cohen_kappa(a, b) == pytest.approx(0.6809, abs=1e-4)
    _passed("kappa unit values: 1.0 / 0.0 / 0.6809")


def test_tsf_ingestion(fixtures_dir):
    parsed = parse_tsf(fixtures_dir / "toy_yearly.tsf")
    assert parsed[0].values == tuple(float(v) for v in range(100, 211, 10))
    assert parsed[1].values[0] == 55.5 and parsed[1].values[-1] == 49.5

    config = DatasetConfig(name="toy", path="", frequency_filter="yearly", horizon=4)
    for history, holdout in select_eval_set(parsed, config, seed=3):
        original = next(s for s in parsed if s.id == history.id)
        assert history.values + holdout == original.values

    pool = [
        TimeSeries(id=f"s{i:02d}", values=tuple(float(v) for v in range(i, i + 16)),
                   frequency="yearly")
        for i in range(30)
    ]
    sub_config = DatasetConfig(
        name="pool", path="", frequency_filter="yearly", horizon=4, max_series=7
    )
    first = [h.id for h, _ in select_eval_set(pool, sub_config, seed=11)]
    second = [h.id for h, _ in select_eval_set(pool, sub_config, seed=11)]
    assert first == second and len(first) == 7
    _passed("tsf ingestion: exact values, split reconstruction, seeded subsetting")


def test_ledger_audit(tmp_path):
    gateway = LLMGateway()
    roles = register_oracle_endpoints(gateway)
    config = hermetic_run_config(str(tmp_path), roles, runs=2)
    eval_sets = hermetic_eval_sets(count=3)
    ledger = run_matrix(config, gateway, eval_sets=eval_sets)

    for record in ledger.results():
        recomputed = distance_report(record["reference_values"], record["surrogate_values"])
        assert recomputed.smape == record["smape"]
        assert recomputed.nmae == record["nmae"]
        assert recomputed.nrmse == record["nrmse"]

    before = len(ledger.records)
    resumed = run_matrix(config, gateway, eval_sets=eval_sets)
    assert len(resumed.records) == before
    assert len(resumed.keys) == before  # zero duplicates
    _passed(f"ledger audit: {before} records recomputable, resume added zero duplicates")


@pytest.mark.skipif(
    not os.environ.get("NLESIM_LIVE_CONFIG"),
    reason="advisory live check; set NLESIM_LIVE_CONFIG to a run config to enable",
)
def test_live_surrogate_ordering_advisory():
    # Environment-dependent and advisory: with a live surrogate endpoint the
    # explained baseline should beat the plain one on average, per dataset.
    from nlesim.config import load_run_setup
    from nlesim.harness import load_eval_sets

    run_config, gateway, _ = load_run_setup(os.environ["NLESIM_LIVE_CONFIG"])
    eval_sets = load_eval_sets(run_config)
    for dataset in run_config.datasets:
        pairs = eval_sets[dataset.name][:20]
        assert len(pairs) >= 20, f"{dataset.name}: need >= 20 series for the advisory check"
        explained, plain = [], []
        for history, _ in pairs:
            for spec in run_config.forecasters:
                for baseline, bucket in (
                    (BASELINE_EXPLAINED, explained), (BASELINE_PLAIN, plain),
                ):
                    result = direct_simulatability(
                        history, spec, dataset.horizon, baseline,
                        run_config.endpoints, run_config.seeds[0], gateway,
                        run_config.simulatability,
                    )
                    bucket.append(result.distances.smape)
        assert float(np.mean(explained)) < float(np.mean(plain)), (
            f"{dataset.name}: explanations did not help on average (advisory)"
        )
    _passed("live surrogate ordering (advisory)")
