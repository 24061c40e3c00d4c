"""Ingestion of Monash-repository .tsf files and history/holdout splitting.

The .tsf grammar: '#' comment lines, '@attribute NAME TYPE' declarations,
'@frequency'/'@horizon'/'@missing'/'@equallength' metadata, then '@data'
followed by one series per line as colon-separated attribute values and a
trailing comma-separated value list.  Series containing '?' are rejected
here; the yearly subsets this package targets contain none.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigInvalid,
    EmptyFile,
    MalformedHeader,
    MalformedRow,
    MissingValues,
    NoSeriesLeft,
)
from .timeseries import TimeSeries

# Monash-published horizons for the yearly subsets; the run config may
# override them.
DEFAULT_HORIZONS = {"tourism": 4, "m3": 6, "m1": 6}


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    path: str
    frequency_filter: str = "yearly"
    horizon: int = 6
    max_series: int | None = None
    min_history: int | None = None  # None: 2 * horizon

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigInvalid(f"horizon must be positive, got {self.horizon}")
        if self.min_history is not None and self.min_history < 2 * self.horizon:
            raise ConfigInvalid(
                f"min_history {self.min_history} must be at least 2x horizon {self.horizon}"
            )
        if self.max_series is not None and self.max_series < 1:
            raise ConfigInvalid("max_series must be positive when set")

    @property
    def effective_min_history(self) -> int:
        return self.min_history if self.min_history is not None else 2 * self.horizon


def parse_tsf(path: str | Path) -> list[TimeSeries]:
    """Parse one .tsf file into TimeSeries records."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not any(line.strip() for line in lines):
        raise EmptyFile(f"{path} is empty")

    attributes: list[tuple[str, str]] = []
    frequency = "other"
    in_data = False
    series: list[TimeSeries] = []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not in_data and line.startswith("@"):
            parts = line.split(" ")
            if parts[0] == "@attribute":
                if len(parts) != 3:
                    raise MalformedHeader(f"{path}:{lineno}: bad @attribute line")
                attributes.append((parts[1], parts[2]))
            elif parts[0] == "@frequency":
                if len(parts) != 2:
                    raise MalformedHeader(f"{path}:{lineno}: bad @frequency line")
                frequency = parts[1]
            elif parts[0] == "@data":
                if not attributes:
                    raise MalformedHeader(f"{path}: @data before any @attribute")
                in_data = True
            else:
                # @relation, @horizon, @missing, @equallength and friends all
                # carry exactly one value.
                if len(parts) != 2:
                    raise MalformedHeader(f"{path}:{lineno}: bad {parts[0]} line")
            continue
        if not in_data:
            raise MalformedHeader(f"{path}:{lineno}: data row before @data tag")

        fields = line.split(":")
        if len(fields) != len(attributes) + 1:
            raise MalformedRow(
                f"{path}:{lineno}: expected {len(attributes)} attributes plus values"
            )
        tokens = [tok.strip() for tok in fields[-1].split(",")]
        if any(tok == "?" for tok in tokens):
            raise MissingValues(f"{path}:{lineno}: series contains missing values")
        try:
            values = tuple(float(tok) for tok in tokens)
        except ValueError as exc:
            raise MalformedRow(f"{path}:{lineno}: non-numeric series value") from exc
        if not values:
            raise MalformedRow(f"{path}:{lineno}: series has no values")

        series_id = fields[0] if attributes else f"series_{len(series)}"
        series.append(
            TimeSeries(
                id=series_id,
                values=values,
                frequency=frequency,
                source=path.stem,
            )
        )

    if not in_data:
        raise MalformedHeader(f"{path}: missing @data section")
    if not series:
        raise EmptyFile(f"{path}: no series in @data section")
    return series


def select_eval_set(
    all_series: Sequence[TimeSeries],
    config: DatasetConfig,
    seed: int,
) -> list[tuple[TimeSeries, tuple[float, ...]]]:
    """Filter by frequency and length, split off the final horizon as
    holdout, and optionally subsample deterministically.

    Input order is preserved so the seed alone determines the subset.
    """
    minimum = config.effective_min_history + config.horizon
    eligible = [
        s
        for s in all_series
        if s.frequency == config.frequency_filter and len(s) >= minimum
    ]
    if not eligible:
        raise NoSeriesLeft(
            f"no {config.frequency_filter} series of length >= {minimum} in {config.name}"
        )
    if config.max_series is not None and config.max_series < len(eligible):
        rng = np.random.default_rng(seed)
        keep = sorted(rng.choice(len(eligible), size=config.max_series, replace=False))
        eligible = [eligible[i] for i in keep]

    out = []
    for s in eligible:
        history = TimeSeries(
            id=s.id,
            values=s.values[: -config.horizon],
            frequency=s.frequency,
            source=s.source,
        )
        holdout = s.values[-config.horizon :]
        out.append((history, holdout))
    return out


def write_series_store(series: Sequence[TimeSeries], path: str | Path) -> None:
    """Normalized JSON-lines store: one {id, frequency, values} record per series."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in series:
            fh.write(
                json.dumps(
                    {"id": s.id, "frequency": s.frequency, "values": list(s.values)}
                )
                + "\n"
            )


def read_series_store(path: str | Path, source: str = "") -> list[TimeSeries]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        out.append(
            TimeSeries(
                id=record["id"],
                values=tuple(record["values"]),
                frequency=record.get("frequency", "other"),
                source=source,
            )
        )
    return out
