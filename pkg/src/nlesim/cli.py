"""Command-line entry point.

`run` executes the experiment matrix (from a YAML config, or fully hermetic
with scripted endpoints and fixture series), `report` renders a ledger,
`explain` and `simulate` run one-off items, and `study` serves the human
study backend.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .config import load_run_setup
from .errors import NlesimError
from .forecasters import forecast, occlusion_importance
from .harness import ResultLedger, load_eval_sets, render_report, run_matrix, summarize
from .hermetic import (
    HERMETIC_DATASET,
    hermetic_eval_sets,
    hermetic_run_config,
    register_oracle_endpoints,
)
from .explainer import generate_explanation
from .gateway import LLMGateway
from .simulatability import (
    MODE_DIRECT,
    SubprocessExecutor,
    direct_simulatability,
    synthetic_simulatability,
)


@click.group()
def main() -> None:
    """Simulatability evaluation for forecast explanations."""


def _setup(config_path: str | None, hermetic: bool, output_dir: str):
    """Shared wiring for run/explain/simulate."""
    if hermetic:
        gateway = LLMGateway()
        roles = register_oracle_endpoints(gateway)
        run_config = hermetic_run_config(output_dir, roles)
        eval_sets = hermetic_eval_sets()
        return run_config, gateway, None, eval_sets
    if config_path is None:
        raise click.UsageError("either --config or --hermetic is required")
    run_config, gateway, executor_command = load_run_setup(config_path)
    return run_config, gateway, executor_command, None


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--hermetic", is_flag=True, help="Scripted endpoints, fixture series, no network.")
@click.option("--resume", is_flag=True, help="Continue into an existing ledger.")
@click.option("--output-dir", default="runs/hermetic", show_default=True,
              help="Output directory for --hermetic runs.")
def run(config_path, hermetic, resume, output_dir):
    """Run the full evaluation matrix and write the ledger + report."""
    run_config, gateway, executor_command, eval_sets = _setup(config_path, hermetic, output_dir)
    ledger_path = Path(run_config.output_dir) / "ledger.jsonl"
    if ledger_path.exists() and not resume:
        raise click.ClickException(
            f"{ledger_path} already exists; pass --resume to continue into it"
        )
    executor = SubprocessExecutor(executor_command) if executor_command else None
    ledger = run_matrix(run_config, gateway, executor=executor, eval_sets=eval_sets)
    summary = summarize(ledger)
    click.echo(
        f"{summary['result_count']} results, {summary['error_count']} errors "
        f"-> {ledger.path}"
    )
    report_path = Path(run_config.output_dir) / "report.md"
    report_path.write_text(render_report(ledger, "markdown"), encoding="utf-8")
    click.echo(f"report -> {report_path}")


@main.command()
@click.option("--ledger", "ledger_path", type=click.Path(exists=True), required=True)
@click.option("--format", "fmt", type=click.Choice(["md", "csv"]), default="md")
def report(ledger_path, fmt):
    """Render a ledger as a markdown or CSV table."""
    ledger = ResultLedger(ledger_path)
    click.echo(render_report(ledger, "markdown" if fmt == "md" else "csv"), nl=False)


def _find_series(run_config, eval_sets, dataset: str, series_id: str):
    if eval_sets is None:
        eval_sets = load_eval_sets(run_config)
    if dataset not in eval_sets:
        raise click.ClickException(f"dataset {dataset!r} not in config")
    for history, _ in eval_sets[dataset]:
        if history.id == series_id:
            return history
    raise click.ClickException(f"series {series_id!r} not found in {dataset!r}")


def _find_forecaster(run_config, forecaster_id: str):
    for spec in run_config.forecasters:
        if spec.id == forecaster_id:
            return spec
    raise click.ClickException(f"forecaster {forecaster_id!r} not in config")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--hermetic", is_flag=True)
@click.option("--dataset", default=HERMETIC_DATASET, show_default=True)
@click.option("--series", "series_id", required=True)
@click.option("--forecaster", "forecaster_id", required=True)
@click.option("--seed", default=101, show_default=True)
def explain(config_path, hermetic, dataset, series_id, forecaster_id, seed):
    """Generate one explanation and print it with its chain provenance."""
    run_config, gateway, _, eval_sets = _setup(config_path, hermetic, "runs/oneoff")
    history = _find_series(run_config, eval_sets, dataset, series_id)
    spec = _find_forecaster(run_config, forecaster_id)
    horizon = next(d.horizon for d in run_config.datasets if d.name == dataset)
    fc = forecast(spec, history, horizon)
    importance = occlusion_importance(spec, history, horizon)
    explanation = generate_explanation(
        history, fc, importance, run_config.endpoints.explainer, seed, gateway,
        run_config.simulatability.explainer,
    )
    click.echo(explanation.text)
    click.echo("\n--- chain ---")
    for i, (prompt, completion) in enumerate(explanation.chain, 1):
        click.echo(f"[stage {i}] prompt {len(prompt)} chars -> completion {len(completion)} chars")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--hermetic", is_flag=True)
@click.option("--dataset", default=HERMETIC_DATASET, show_default=True)
@click.option("--series", "series_id", required=True)
@click.option("--forecaster", "forecaster_id", required=True)
@click.option("--baseline", default="LLMTime_E", show_default=True)
@click.option("--mode", type=click.Choice(["direct", "synthetic"]), default="direct")
@click.option("--executor-cmd", default=None, help="Override executor argv (space-separated).")
@click.option("--seed", default=101, show_default=True)
def simulate(config_path, hermetic, dataset, series_id, forecaster_id, baseline, mode,
             executor_cmd, seed):
    """Run one simulatability measurement and print it as JSON."""
    run_config, gateway, executor_command, eval_sets = _setup(config_path, hermetic, "runs/oneoff")
    history = _find_series(run_config, eval_sets, dataset, series_id)
    spec = _find_forecaster(run_config, forecaster_id)
    horizon = next(d.horizon for d in run_config.datasets if d.name == dataset)

    if mode == MODE_DIRECT:
        result = direct_simulatability(
            history, spec, horizon, baseline, run_config.endpoints, seed, gateway,
            run_config.simulatability,
        )
        results = [result]
    else:
        command = executor_cmd.split() if executor_cmd else executor_command
        if not command:
            raise click.ClickException("synthetic mode needs --executor-cmd or config executor_command")
        results = list(
            synthetic_simulatability(
                history, spec, horizon, run_config.endpoints,
                SubprocessExecutor(command), seed, gateway, run_config.simulatability,
            )
        )
    for result in results:
        click.echo(json.dumps(dataclasses.asdict(result), indent=2))


@main.command()
@click.option("--items", "items_path", type=click.Path(exists=True), required=True)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory with the built study UI bundle.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8800, show_default=True)
def study(items_path, static_dir, host, port):
    """Serve the human-study backend (and UI bundle, when provided)."""
    import uvicorn

    from .study import create_app, load_item_bank

    app = create_app(load_item_bank(items_path), static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


def entry() -> None:
    try:
        main(standalone_mode=True)
    except NlesimError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entry()
