"""Experiment harness: run the dataset x forecaster x baseline x run matrix,
persist every measurement to an append-only JSON-lines ledger, and render
reports shaped like the sanity-check and model-comparison tables.

The ledger is crash-safe and resumable: records append as items complete,
and a rerun skips any (mode, dataset, series, forecaster, baseline, seed)
key already present.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .datasets import DatasetConfig, parse_tsf, select_eval_set
from .errors import ConfigInvalid, EmptyLedger
from .forecasters import ForecasterSpec
from .gateway import LLMGateway
from .metrics import DistanceReport, aggregate, normalized_synthetic_score
from .simulatability import (
    BASELINE_EXPLAINED,
    BASELINE_PLAIN,
    BASELINES,
    EndpointRoles,
    GeneratorExecutor,
    MODE_DIRECT,
    MODE_SYNTHETIC,
    SimulatabilityConfig,
    SimulationResult,
    direct_simulatability,
    synthetic_simulatability,
)
from .timeseries import TimeSeries

EvalSet = list[tuple[TimeSeries, tuple[float, ...]]]


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple[DatasetConfig, ...]
    forecasters: tuple[ForecasterSpec, ...]
    baselines: tuple[str, ...]
    endpoints: EndpointRoles
    seeds: tuple[int, ...]
    output_dir: str
    runs: int = 3
    parallelism: int = 4
    synthetic: bool = False
    simulatability: SimulatabilityConfig = field(default_factory=SimulatabilityConfig)

    def __post_init__(self) -> None:
        if not self.datasets or not self.forecasters or not self.baselines:
            raise ConfigInvalid("datasets, forecasters and baselines must be non-empty")
        unknown = set(self.baselines) - set(BASELINES)
        if unknown:
            raise ConfigInvalid(f"unknown baselines: {sorted(unknown)}")
        if self.runs < 1:
            raise ConfigInvalid("runs must be positive")
        if len(self.seeds) != self.runs:
            raise ConfigInvalid(f"need {self.runs} seeds, got {len(self.seeds)}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigInvalid("seeds must be distinct")
        if self.parallelism < 1:
            raise ConfigInvalid("parallelism must be positive")


def _record_key(record: dict) -> tuple:
    return (
        record["mode"],
        record["dataset"],
        record["series_id"],
        record["forecaster_id"],
        record["baseline"],
        record["run_seed"],
    )


class ResultLedger:
    """Append-only JSON-lines store of simulation results and item errors."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.records: list[dict] = []
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self.records.append(json.loads(line))

    @property
    def keys(self) -> set[tuple]:
        return {_record_key(r) for r in self.records}

    def append(self, record: dict) -> None:
        with self._lock:
            self.records.append(record)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")

    def results(self) -> list[dict]:
        return [r for r in self.records if r["kind"] == "result"]

    def errors(self) -> list[dict]:
        return [r for r in self.records if r["kind"] == "error"]


def result_record(dataset: str, result: SimulationResult) -> dict:
    return {
        "kind": "result",
        "mode": result.mode,
        "dataset": dataset,
        "series_id": result.series_id,
        "forecaster_id": result.forecaster_id,
        "baseline": result.baseline,
        "run_seed": result.run_seed,
        "surrogate_values": list(result.surrogate_values),
        "reference_values": list(result.reference_values),
        "smape": result.distances.smape,
        "nmae": result.distances.nmae,
        "nrmse": result.distances.nrmse,
        "generator_code": result.generator_code,
    }


def error_record(
    dataset: str, mode: str, series_id: str, forecaster_id: str,
    baseline: str, run_seed: int, error: Exception,
) -> dict:
    return {
        "kind": "error",
        "mode": mode,
        "dataset": dataset,
        "series_id": series_id,
        "forecaster_id": forecaster_id,
        "baseline": baseline,
        "run_seed": run_seed,
        "error": f"{type(error).__name__}: {error}",
    }


def load_eval_sets(config: RunConfig) -> dict[str, EvalSet]:
    """Parse and split every configured dataset; selection is seeded by the
    first run seed so all runs share one subset."""
    out = {}
    for ds in config.datasets:
        out[ds.name] = select_eval_set(parse_tsf(ds.path), ds, seed=config.seeds[0])
    return out


def _matrix_items(config: RunConfig, eval_sets: dict[str, EvalSet]) -> Iterable[dict]:
    for ds in config.datasets:
        for history, _holdout in eval_sets[ds.name]:
            for spec in config.forecasters:
                for seed in config.seeds:
                    for baseline in config.baselines:
                        yield {
                            "mode": MODE_DIRECT, "dataset": ds.name, "series": history,
                            "horizon": ds.horizon, "spec": spec,
                            "baseline": baseline, "seed": seed,
                        }
                    if config.synthetic:
                        yield {
                            "mode": MODE_SYNTHETIC, "dataset": ds.name, "series": history,
                            "horizon": ds.horizon, "spec": spec,
                            "baseline": BASELINE_PLAIN, "seed": seed,
                        }


def run_matrix(
    config: RunConfig,
    gateway: LLMGateway,
    executor: GeneratorExecutor | None = None,
    eval_sets: dict[str, EvalSet] | None = None,
    ledger_path: str | Path | None = None,
) -> ResultLedger:
    """Execute every matrix cell, appending to the ledger as items finish.

    Per-item failures are recorded and never abort the matrix.  Synthetic
    items carry the key baseline LLMTime and also append their paired
    LLMTime_E record.
    """
    if config.synthetic and executor is None:
        raise ConfigInvalid("synthetic evaluation requires an executor")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ledger = ResultLedger(ledger_path or out_dir / "ledger.jsonl")
    existing = ledger.keys

    if eval_sets is None:
        eval_sets = load_eval_sets(config)

    def item_key(item: dict) -> tuple:
        return (
            item["mode"], item["dataset"], item["series"].id,
            item["spec"].id, item["baseline"], item["seed"],
        )

    def run_item(item: dict) -> list[dict]:
        try:
            if item["mode"] == MODE_DIRECT:
                result = direct_simulatability(
                    item["series"], item["spec"], item["horizon"], item["baseline"],
                    config.endpoints, item["seed"], gateway, config.simulatability,
                )
                return [result_record(item["dataset"], result)]
            plain, with_tip = synthetic_simulatability(
                item["series"], item["spec"], item["horizon"],
                config.endpoints, executor, item["seed"], gateway,
                config.simulatability,
            )
            return [
                result_record(item["dataset"], plain),
                result_record(item["dataset"], with_tip),
            ]
        except Exception as exc:  # per-item isolation is the contract
            return [
                error_record(
                    item["dataset"], item["mode"], item["series"].id,
                    item["spec"].id, item["baseline"], item["seed"], exc,
                )
            ]

    pending = [
        item for item in _matrix_items(config, eval_sets)
        if item_key(item) not in existing
    ]
    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        futures = [pool.submit(run_item, item) for item in pending]
        for future in as_completed(futures):
            for record in future.result():
                ledger.append(record)
    return ledger


# --- aggregation and reports -------------------------------------------------


def summarize(ledger: ResultLedger) -> dict:
    """Aggregate the ledger: run means first, then across runs, per
    (mode, dataset, forecaster, baseline) cell, plus normalized synthetic
    scores per (dataset, forecaster)."""
    if not ledger.records:
        raise EmptyLedger("ledger has no records")

    cells: dict[tuple, dict[int, list[DistanceReport]]] = {}
    for rec in ledger.results():
        cell = (rec["mode"], rec["dataset"], rec["forecaster_id"], rec["baseline"])
        cells.setdefault(cell, {}).setdefault(rec["run_seed"], []).append(
            DistanceReport(rec["smape"], rec["nmae"], rec["nrmse"])
        )

    table: dict[tuple, DistanceReport] = {}
    for cell, by_run in cells.items():
        run_means = [aggregate(reports, 1) for reports in by_run.values()]
        table[cell] = aggregate(run_means, len(run_means))

    nss: dict[tuple, float] = {}
    for (mode, dataset, forecaster, baseline), report in table.items():
        if mode != MODE_SYNTHETIC or baseline != BASELINE_EXPLAINED:
            continue
        plain = table.get((MODE_SYNTHETIC, dataset, forecaster, BASELINE_PLAIN))
        if plain is not None and (plain.smape + report.smape) > 0:
            nss[(dataset, forecaster)] = normalized_synthetic_score(
                report.smape, plain.smape
            )

    return {
        "cells": table,
        "nss": nss,
        "result_count": len(ledger.results()),
        "error_count": len(ledger.errors()),
    }


def _sci(value: float) -> str:
    return f"{value:.2E}"


def render_report(ledger: ResultLedger, format: str = "markdown") -> str:
    """Rows are baselines grouped by dataset, columns are forecasters;
    distances in 3-significant-digit scientific notation, normalized
    synthetic scores to 2 decimals."""
    if format not in ("markdown", "csv"):
        raise ConfigInvalid(f"unknown report format {format!r}")
    summary = summarize(ledger)
    cells: dict[tuple, DistanceReport] = summary["cells"]

    datasets = sorted({key[1] for key in cells})
    forecasters = sorted({key[2] for key in cells})
    modes = [m for m in (MODE_DIRECT, MODE_SYNTHETIC) if any(k[0] == m for k in cells)]

    if format == "csv":
        lines = ["mode,dataset,forecaster,baseline,metric,value"]
        for (mode, dataset, forecaster, baseline), report in sorted(cells.items()):
            for metric in ("smape", "nmae", "nrmse"):
                lines.append(
                    f"{mode},{dataset},{forecaster},{baseline},{metric},"
                    f"{getattr(report, metric)!r}"
                )
        for (dataset, forecaster), value in sorted(summary["nss"].items()):
            lines.append(f"synthetic,{dataset},{forecaster},LLMTime_E,nss,{value!r}")
        return "\n".join(lines) + "\n"

    lines = []
    for mode in modes:
        lines.append(f"## {mode.capitalize()} simulatability (sMAPE)")
        lines.append("")
        header = "| Dataset | Baseline | " + " | ".join(forecasters) + " |"
        lines.append(header)
        lines.append("|" + "---|" * (len(forecasters) + 2))
        for dataset in datasets:
            for baseline in BASELINES:
                row = [
                    _sci(cells[(mode, dataset, fc, baseline)].smape)
                    if (mode, dataset, fc, baseline) in cells
                    else "-"
                    for fc in forecasters
                ]
                if set(row) == {"-"}:
                    continue
                lines.append(f"| {dataset} | {baseline} | " + " | ".join(row) + " |")
        lines.append("")
    if summary["nss"]:
        lines.append("## Normalized synthetic simulatability")
        lines.append("")
        lines.append("| Dataset | " + " | ".join(forecasters) + " |")
        lines.append("|" + "---|" * (len(forecasters) + 1))
        for dataset in datasets:
            row = [
                f"{summary['nss'][(dataset, fc)]:.2f}"
                if (dataset, fc) in summary["nss"]
                else "-"
                for fc in forecasters
            ]
            if set(row) != {"-"}:
                lines.append(f"| {dataset} | " + " | ".join(row) + " |")
        lines.append("")
    lines.append(
        f"{summary['result_count']} results, {summary['error_count']} errors."
    )
    return "\n".join(lines) + "\n"
