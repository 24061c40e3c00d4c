from __future__ import annotations

import csv
import io
import json

import pytest

from nlesim.errors import ConfigInvalid, EmptyLedger, TransportError
from nlesim.forecasters import ForecasterSpec
from nlesim.gateway import Endpoint, LLMGateway
from nlesim.harness import (
    ResultLedger,
    RunConfig,
    render_report,
    run_matrix,
    summarize,
)
from nlesim.hermetic import (
    hermetic_eval_sets,
    hermetic_run_config,
    register_oracle_endpoints,
)
from nlesim.metrics import distance_report
from nlesim.simulatability import EndpointRoles


@pytest.fixture
def hermetic_setup(tmp_path):
    gateway = LLMGateway()
    roles = register_oracle_endpoints(gateway)
    return gateway, roles, tmp_path


def small_config(roles, tmp_path, **overrides):
    base = hermetic_run_config(str(tmp_path), roles, runs=1)
    fields = dict(
        datasets=base.datasets,
        forecasters=base.forecasters[:2],
        baselines=base.baselines,
        endpoints=base.endpoints,
        seeds=base.seeds,
        output_dir=base.output_dir,
        runs=base.runs,
        parallelism=base.parallelism,
        synthetic=base.synthetic,
        simulatability=base.simulatability,
    )
    fields.update(overrides)
    return RunConfig(**fields)


def test_run_config_validation(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    with pytest.raises(ConfigInvalid):
        small_config(roles, tmp_path, baselines=("LLMTime_X",))
    with pytest.raises(ConfigInvalid):
        small_config(roles, tmp_path, seeds=(1, 1), runs=2)
    with pytest.raises(ConfigInvalid):
        small_config(roles, tmp_path, seeds=(1,), runs=2)
    with pytest.raises(ConfigInvalid):
        small_config(roles, tmp_path, forecasters=())


def test_matrix_counts_records(hermetic_setup):
    # 2 series x 2 forecasters x 4 baselines x 1 run = 16 direct records.
    gateway, roles, tmp_path = hermetic_setup
    config = small_config(roles, tmp_path)
    eval_sets = hermetic_eval_sets(count=2)
    ledger = run_matrix(config, gateway, eval_sets=eval_sets)
    assert len(ledger.results()) == 16
    assert len(ledger.errors()) == 0
    summary = summarize(ledger)
    assert summary["result_count"] == 16
    assert len(summary["cells"]) == 2 * 4  # per (forecaster, baseline)


def test_matrix_resume_no_new_calls_no_duplicates(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    config = small_config(roles, tmp_path)
    eval_sets = hermetic_eval_sets(count=2)
    ledger = run_matrix(config, gateway, eval_sets=eval_sets)
    calls_before = sum(ep.backend.calls for ep in gateway.endpoints.values())

    resumed = run_matrix(config, gateway, eval_sets=eval_sets)
    calls_after = sum(ep.backend.calls for ep in gateway.endpoints.values())
    assert calls_after == calls_before
    assert len(resumed.records) == len(ledger.records)
    assert len(resumed.keys) == len(resumed.records)  # no duplicate keys


def test_matrix_partial_resume_completes_missing(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    config = small_config(roles, tmp_path)
    eval_sets = hermetic_eval_sets(count=2)
    ledger = run_matrix(config, gateway, eval_sets=eval_sets)

    # Drop half the ledger lines and resume; only the dropped cells rerun.
    lines = ledger.path.read_text().strip().split("\n")
    ledger.path.write_text("\n".join(lines[:8]) + "\n")
    resumed = run_matrix(config, gateway, eval_sets=eval_sets)
    assert len(resumed.results()) == 16
    assert len(resumed.keys) == 16


class BoomBackend:
    def complete(self, request):
        raise TransportError("always down")


def test_matrix_records_item_errors_and_completes(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    gateway.max_retries = 0
    gateway.register(Endpoint(id="broken", backend=BoomBackend()))
    config = small_config(
        roles, tmp_path,
        endpoints=EndpointRoles(surrogate="broken", explainer=roles.explainer),
        baselines=("LLMTime",),
        forecasters=(ForecasterSpec(id="naive", kind="naive"),),
    )
    eval_sets = hermetic_eval_sets(count=2)
    ledger = run_matrix(config, gateway, eval_sets=eval_sets)
    assert len(ledger.errors()) == 2
    assert len(ledger.results()) == 0
    assert all("TransportError" in e["error"] for e in ledger.errors())


def test_ledger_audit_distances_recomputable(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    config = small_config(roles, tmp_path)
    ledger = run_matrix(config, gateway, eval_sets=hermetic_eval_sets(count=3))
    for record in ledger.results():
        recomputed = distance_report(record["reference_values"], record["surrogate_values"])
        assert recomputed.smape == record["smape"]
        assert recomputed.nmae == record["nmae"]
        assert recomputed.nrmse == record["nrmse"]


def test_ledger_is_json_lines_on_disk(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    config = small_config(roles, tmp_path, baselines=("LLMTime",))
    ledger = run_matrix(config, gateway, eval_sets=hermetic_eval_sets(count=1))
    lines = ledger.path.read_text().strip().split("\n")
    assert len(lines) == len(ledger.records)
    required = {
        "kind", "mode", "dataset", "series_id", "forecaster_id",
        "baseline", "run_seed", "smape", "nmae", "nrmse",
        "surrogate_values", "reference_values",
    }
    for line in lines:
        record = json.loads(line)
        assert required <= set(record)


# --- report rendering -------------------------------------------------------------------


def single_cell_ledger(tmp_path, smape_value=0.455):
    ledger = ResultLedger(tmp_path / "ledger.jsonl")
    ledger.append(
        {
            "kind": "result", "mode": "direct", "dataset": "toy",
            "series_id": "s1", "forecaster_id": "naive", "baseline": "LLMTime",
            "run_seed": 1, "surrogate_values": [1.0], "reference_values": [1.0],
            "smape": smape_value, "nmae": smape_value, "nrmse": smape_value,
            "generator_code": None,
        }
    )
    return ledger


def test_report_scientific_notation(tmp_path):
    report = render_report(single_cell_ledger(tmp_path), "markdown")
    assert "4.55E-01" in report


def test_report_nss_two_decimals(hermetic_setup, local_executor=None):
    # Synthetic pair rows produce an NSS table formatted to 2 decimals.
    gateway, roles, tmp_path = hermetic_setup
    ledger = ResultLedger(tmp_path / "ledger.jsonl")
    for baseline, smape_value in (("LLMTime", 0.29), ("LLMTime_E", 0.21)):
        ledger.append(
            {
                "kind": "result", "mode": "synthetic", "dataset": "toy",
                "series_id": "s1", "forecaster_id": "drift", "baseline": baseline,
                "run_seed": 1, "surrogate_values": [1.0], "reference_values": [1.0],
                "smape": smape_value, "nmae": smape_value, "nrmse": smape_value,
                "generator_code": None,
            }
        )
    report = render_report(ledger, "markdown")
    assert "Normalized synthetic" in report
    assert "0.42" in report  # 0.21 / (0.29 + 0.21)


def test_report_csv_round_trip(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    config = small_config(roles, tmp_path)
    ledger = run_matrix(config, gateway, eval_sets=hermetic_eval_sets(count=2))
    text = render_report(ledger, "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    summary = summarize(ledger)
    for row in rows:
        if row["metric"] != "smape":
            continue
        cell = (row["mode"], row["dataset"], row["forecaster"], row["baseline"])
        assert float(row["value"]) == summary["cells"][cell].smape


def test_report_empty_ledger_rejected(tmp_path):
    with pytest.raises(EmptyLedger):
        render_report(ResultLedger(tmp_path / "none.jsonl"), "markdown")


def test_summary_reproduces_report_values(hermetic_setup):
    gateway, roles, tmp_path = hermetic_setup
    config = small_config(roles, tmp_path)
    ledger = run_matrix(config, gateway, eval_sets=hermetic_eval_sets(count=2))
    report = render_report(ledger, "markdown")
    summary = summarize(ledger)
    for (mode, dataset, forecaster, baseline), dist in summary["cells"].items():
        assert f"{dist.smape:.2E}" in report
