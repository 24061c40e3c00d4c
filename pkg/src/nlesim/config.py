"""Run configuration: one YAML file describing endpoints, datasets,
forecasters, baselines and run parameters.

API keys are never stored in the file; each endpoint names the environment
variable that holds its key.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .datasets import DatasetConfig
from .errors import ConfigInvalid
from .explainer import ExplainerConfig
from .forecasters import ForecasterSpec
from .gateway import Endpoint, GenerationParams, LLMGateway, OpenAIChatBackend
from .harness import RunConfig
from .simulatability import BASELINES, EndpointRoles, SimulatabilityConfig
from .surrogate import SurrogateConfig


def _params(raw: dict | None) -> GenerationParams:
    raw = raw or {}
    return GenerationParams(
        temperature=float(raw.get("temperature", 1.0)),
        top_p=float(raw.get("top_p", 1.0)),
        repetition_penalty=float(raw.get("repetition_penalty", 1.0)),
        max_tokens=int(raw.get("max_tokens", 1024)),
        seed=raw.get("seed"),
    )


def build_gateway(raw: dict) -> LLMGateway:
    gateway = LLMGateway(
        cache_dir=raw.get("cache_dir"),
        max_retries=int(raw.get("max_retries", 3)),
    )
    for spec in raw.get("endpoints", []):
        if "id" not in spec or "base_url" not in spec or "model" not in spec:
            raise ConfigInvalid("each endpoint needs id, base_url and model")
        gateway.register(
            Endpoint(
                id=spec["id"],
                backend=OpenAIChatBackend(
                    base_url=spec["base_url"],
                    model=spec["model"],
                    api_key_env=spec.get("api_key_env"),
                    timeout=float(spec.get("timeout_s", 60.0)),
                ),
                default_params=_params(spec.get("params")),
                requests_per_minute=spec.get("requests_per_minute"),
            )
        )
    return gateway


def load_run_setup(path: str | Path) -> tuple[RunConfig, LLMGateway, list[str] | None]:
    """Parse the YAML run config; returns (run config, gateway with
    registered endpoints, optional executor command)."""
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ConfigInvalid(f"{path}: top level must be a mapping")

    gateway = build_gateway(raw)

    roles_raw = raw.get("roles") or {}
    if "surrogate" not in roles_raw or "explainer" not in roles_raw:
        raise ConfigInvalid("roles must name surrogate and explainer endpoints")
    roles = EndpointRoles(
        surrogate=roles_raw["surrogate"],
        explainer=roles_raw["explainer"],
        tip=roles_raw.get("tip"),
        codegen=roles_raw.get("codegen"),
    )
    for endpoint_id in {roles.surrogate, roles.explainer, roles.tip_endpoint, roles.codegen_endpoint}:
        if endpoint_id not in gateway.endpoints:
            raise ConfigInvalid(f"role references unregistered endpoint {endpoint_id!r}")

    datasets = tuple(
        DatasetConfig(
            name=ds["name"],
            path=ds["path"],
            frequency_filter=ds.get("frequency_filter", "yearly"),
            horizon=int(ds.get("horizon", 6)),
            max_series=ds.get("max_series"),
            min_history=ds.get("min_history"),
        )
        for ds in raw.get("datasets", [])
    )
    forecasters = tuple(
        ForecasterSpec(id=fc["id"], kind=fc["kind"], params=fc.get("params", {}))
        for fc in raw.get("forecasters", [])
    )
    baselines = tuple(raw.get("baselines", list(BASELINES)))

    pipeline_raw = raw.get("pipeline") or {}
    simulatability = SimulatabilityConfig(
        explainer=ExplainerConfig(
            encoding_precision=int(pipeline_raw.get("encoding_precision", 2)),
            max_explanation_chars=int(pipeline_raw.get("max_explanation_chars", 2000)),
        ),
        surrogate=SurrogateConfig(
            encoding_precision=int(pipeline_raw.get("encoding_precision", 2)),
            max_parse_retries=int(pipeline_raw.get("max_parse_retries", 2)),
        ),
        codegen_retries=int(pipeline_raw.get("codegen_retries", 3)),
        synthetic_total_length=pipeline_raw.get("synthetic_total_length"),
        executor_timeout_s=int(pipeline_raw.get("executor_timeout_s", 10)),
    )

    runs = int(raw.get("runs", 3))
    seeds = tuple(int(s) for s in raw.get("seeds", range(1, runs + 1)))
    config = RunConfig(
        datasets=datasets,
        forecasters=forecasters,
        baselines=baselines,
        endpoints=roles,
        seeds=seeds,
        output_dir=str(raw.get("output_dir", "runs")),
        runs=runs,
        parallelism=int(raw.get("parallelism", 4)),
        synthetic=bool(raw.get("synthetic", False)),
        simulatability=simulatability,
    )
    executor_command = raw.get("executor_command")
    if executor_command is not None and not isinstance(executor_command, list):
        raise ConfigInvalid("executor_command must be a list of argv strings")
    return config, gateway, executor_command
