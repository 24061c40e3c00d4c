"""Backend for the two-part human study.

Part 1: annotators draw a forecast for each item twice, first without and
then with the explanation; the per-item improvement is the sMAPE delta
against the black-box forecast.  Part 2: annotators see the reference
forecast and label each explanation useful / not useful.  Agreement with the
metric classification is summarized with Cohen's kappa.

The reference forecast is never present in part-1 payloads, and the
explanation is only served once an item's without-pass has been submitted.
"""

from __future__ import annotations

import json
import math
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel, Field

from .errors import (
    ConfigInvalid,
    ConsentMissing,
    DuplicateSubmission,
    ItemBankEmpty,
    NoCompletedSessions,
    WrongLength,
    WrongOrder,
)
from .metrics import cohen_kappa, smape

PASS_WITHOUT = "without"
PASS_WITH = "with"
LABEL_USEFUL = "useful"
LABEL_NOT_USEFUL = "not_useful"


@dataclass(frozen=True)
class StudyItem:
    item_id: str
    history: tuple[float, ...]
    horizon: int
    explanation_text: str
    reference_forecast: tuple[float, ...]
    metric_label: str

    def __post_init__(self) -> None:
        if self.metric_label not in (LABEL_USEFUL, LABEL_NOT_USEFUL):
            raise ConfigInvalid(
                f"item {self.item_id!r}: metric_label must be useful/not_useful"
            )
        if len(self.reference_forecast) != self.horizon:
            raise ConfigInvalid(f"item {self.item_id!r}: reference length != horizon")


def load_item_bank(path: str | Path) -> list[StudyItem]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        StudyItem(
            item_id=entry["item_id"],
            history=tuple(entry["history"]),
            horizon=int(entry["horizon"]),
            explanation_text=entry["explanation"],
            reference_forecast=tuple(entry["reference_forecast"]),
            metric_label=entry["metric_label"],
        )
        for entry in raw
    ]


@dataclass
class Part1Response:
    without_values: tuple[float, ...] | None = None
    with_values: tuple[float, ...] | None = None
    improvement: float | None = None

    @property
    def complete(self) -> bool:
        return self.without_values is not None and self.with_values is not None


@dataclass
class StudySession:
    session_id: str
    annotator_id: str
    part: int
    item_order: tuple[str, ...]
    part1: dict[str, Part1Response] = field(default_factory=dict)
    part2: dict[str, str] = field(default_factory=dict)

    def next_pending(self) -> tuple[str, str] | None:
        """(item_id, expected pass) of the next thing to collect, or None."""
        for item_id in self.item_order:
            if self.part == 1:
                response = self.part1.get(item_id)
                if response is None or response.without_values is None:
                    return item_id, PASS_WITHOUT
                if response.with_values is None:
                    return item_id, PASS_WITH
            else:
                if item_id not in self.part2:
                    return item_id, "label"
        return None

    @property
    def completed(self) -> bool:
        return self.next_pending() is None


class StudyService:
    """In-memory store with server-enforced pass ordering."""

    def __init__(self, items: Sequence[StudyItem]):
        if not items:
            raise ItemBankEmpty("study needs a non-empty item bank")
        self.items = {item.item_id: item for item in items}
        self.item_order = tuple(item.item_id for item in items)
        self.sessions: dict[str, StudySession] = {}
        self._lock = threading.Lock()

    def create_session(self, annotator_id: str, part: int, consent: bool) -> StudySession:
        if not consent:
            raise ConsentMissing("annotator consent is required before serving items")
        if part not in (1, 2):
            raise ConfigInvalid(f"part must be 1 or 2, got {part}")
        session = StudySession(
            session_id=uuid.uuid4().hex,
            annotator_id=annotator_id,
            part=part,
            item_order=self.item_order,
        )
        with self._lock:
            self.sessions[session.session_id] = session
        return session

    def _session(self, session_id: str) -> StudySession:
        session = self.sessions.get(session_id)
        if session is None:
            raise KeyError(f"unknown session {session_id!r}")
        return session

    def next_item(self, session_id: str) -> dict | None:
        """Payload for the next pending item; never leaks the reference
        forecast in part 1, nor the explanation before the with pass."""
        session = self._session(session_id)
        pending = session.next_pending()
        if pending is None:
            return None
        item_id, expected = pending
        item = self.items[item_id]
        payload = {
            "item_id": item.item_id,
            "history": list(item.history),
            "horizon": item.horizon,
        }
        if session.part == 1:
            payload["pass"] = expected
            if expected == PASS_WITH:
                payload["explanation"] = item.explanation_text
        else:
            payload["explanation"] = item.explanation_text
            payload["reference_forecast"] = list(item.reference_forecast)
            payload["labels"] = [LABEL_USEFUL, LABEL_NOT_USEFUL]
        return payload

    def submit_part1(
        self, session_id: str, item_id: str, pass_name: str, values: Sequence[float]
    ) -> dict:
        session = self._session(session_id)
        if session.part != 1:
            raise WrongOrder("session is not a part-1 session")
        item = self.items.get(item_id)
        if item is None:
            raise KeyError(f"unknown item {item_id!r}")
        if pass_name not in (PASS_WITHOUT, PASS_WITH):
            raise ConfigInvalid(f"unknown pass {pass_name!r}")
        if len(values) != item.horizon:
            raise WrongLength(f"expected {item.horizon} values, got {len(values)}")
        if any(not math.isfinite(v) for v in values):
            raise WrongLength("drawn forecast contains non-finite values")

        with self._lock:
            response = session.part1.setdefault(item_id, Part1Response())
            if pass_name == PASS_WITHOUT:
                if response.without_values is not None:
                    raise DuplicateSubmission(f"without-pass already stored for {item_id!r}")
                response.without_values = tuple(values)
            else:
                if response.without_values is None:
                    raise WrongOrder(f"without-pass must precede with-pass for {item_id!r}")
                if response.with_values is not None:
                    raise DuplicateSubmission(f"with-pass already stored for {item_id!r}")
                response.with_values = tuple(values)
                response.improvement = smape(
                    item.reference_forecast, response.without_values
                ) - smape(item.reference_forecast, response.with_values)
        return {"ok": True, "item_id": item_id, "pass": pass_name}

    def submit_part2(self, session_id: str, item_id: str, label: str) -> dict:
        session = self._session(session_id)
        if session.part != 2:
            raise WrongOrder("session is not a part-2 session")
        if item_id not in self.items:
            raise KeyError(f"unknown item {item_id!r}")
        if label not in (LABEL_USEFUL, LABEL_NOT_USEFUL):
            raise ConfigInvalid(f"unknown label {label!r}")
        with self._lock:
            if item_id in session.part2:
                raise DuplicateSubmission(f"label already stored for {item_id!r}")
            session.part2[item_id] = label
        return {"ok": True, "item_id": item_id, "label": label}

    def summary(self) -> dict:
        return study_summary(list(self.sessions.values()), list(self.items.values()))


def study_summary(sessions: Sequence[StudySession], items: Sequence[StudyItem]) -> dict:
    """Pure function of the stored records; recomputation is idempotent.

    Part 1 reports mean (absolute and relative) sMAPE improvement grouped by
    the metric label, plus kappa between per-item 'improved' votes and the
    metric labels.  Part 2 reports kappa between human labels and metric
    labels.  Per-item intermediates are included for audit.
    """
    by_id = {item.item_id: item for item in items}
    part1_sessions = [s for s in sessions if s.part == 1 and s.completed]
    part2_sessions = [s for s in sessions if s.part == 2 and s.completed]
    if not part1_sessions and not part2_sessions:
        raise NoCompletedSessions("no completed sessions to summarize")

    summary: dict = {"part1": None, "part2": None}

    if part1_sessions:
        details = []
        improvements: dict[str, list[float]] = {LABEL_USEFUL: [], LABEL_NOT_USEFUL: []}
        relative: dict[str, list[float]] = {LABEL_USEFUL: [], LABEL_NOT_USEFUL: []}
        human_votes: list[str] = []
        metric_votes: list[str] = []
        for session in part1_sessions:
            for item_id, response in session.part1.items():
                item = by_id[item_id]
                improvement = response.improvement
                baseline = smape(item.reference_forecast, response.without_values)
                improvements[item.metric_label].append(improvement)
                if baseline > 0:
                    relative[item.metric_label].append(improvement / baseline)
                vote = LABEL_USEFUL if improvement > 0 else LABEL_NOT_USEFUL
                human_votes.append(vote)
                metric_votes.append(item.metric_label)
                details.append(
                    {
                        "session_id": session.session_id,
                        "annotator_id": session.annotator_id,
                        "item_id": item_id,
                        "improvement": improvement,
                        "smape_without": baseline,
                        "smape_with": smape(item.reference_forecast, response.with_values),
                        "improved": vote,
                        "metric_label": item.metric_label,
                    }
                )
        summary["part1"] = {
            "sessions": len(part1_sessions),
            "mean_improvement": {
                label: (sum(vals) / len(vals) if vals else None)
                for label, vals in improvements.items()
            },
            "mean_relative_improvement": {
                label: (sum(vals) / len(vals) if vals else None)
                for label, vals in relative.items()
            },
            "kappa": cohen_kappa(human_votes, metric_votes),
            "items": details,
        }

    if part2_sessions:
        details = []
        human_votes = []
        metric_votes = []
        for session in part2_sessions:
            for item_id, label in session.part2.items():
                human_votes.append(label)
                metric_votes.append(by_id[item_id].metric_label)
                details.append(
                    {
                        "session_id": session.session_id,
                        "annotator_id": session.annotator_id,
                        "item_id": item_id,
                        "label": label,
                        "metric_label": by_id[item_id].metric_label,
                    }
                )
        summary["part2"] = {
            "sessions": len(part2_sessions),
            "kappa": cohen_kappa(human_votes, metric_votes),
            "items": details,
        }

    return summary


class CreateSessionBody(BaseModel):
    annotator_id: str
    part: int
    consent: bool = False


class ForecastSubmissionBody(BaseModel):
    # "pass" is a Python keyword; the wire field keeps the plain name.
    pass_name: str = Field(alias="pass")
    values: list[float]

    model_config = {"populate_by_name": True}


class LabelSubmissionBody(BaseModel):
    label: str


def create_app(items: Sequence[StudyItem], static_dir: str | Path | None = None):
    """FastAPI wrapper over StudyService plus static hosting for the UI bundle."""
    from fastapi import FastAPI, HTTPException
    from fastapi.staticfiles import StaticFiles

    service = StudyService(items)
    app = FastAPI(title="forecast-explanation study")
    app.state.service = service

    def _http(exc: Exception) -> HTTPException:
        mapping = {
            ConsentMissing: 403,
            WrongOrder: 409,
            DuplicateSubmission: 409,
            WrongLength: 422,
            ConfigInvalid: 422,
            KeyError: 404,
            NoCompletedSessions: 409,
        }
        status = mapping.get(type(exc), 500)
        return HTTPException(status_code=status, detail=str(exc).strip("'\""))

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            session = service.create_session(body.annotator_id, body.part, body.consent)
        except Exception as exc:
            raise _http(exc) from exc
        return {
            "session_id": session.session_id,
            "part": session.part,
            "item_count": len(session.item_order),
        }

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        try:
            payload = service.next_item(session_id)
        except Exception as exc:
            raise _http(exc) from exc
        return {"done": payload is None, "item": payload}

    @app.post("/sessions/{session_id}/items/{item_id}/forecast")
    def submit_forecast(session_id: str, item_id: str, body: ForecastSubmissionBody):
        try:
            return service.submit_part1(session_id, item_id, body.pass_name, body.values)
        except Exception as exc:
            raise _http(exc) from exc

    @app.post("/sessions/{session_id}/items/{item_id}/label")
    def submit_label(session_id: str, item_id: str, body: LabelSubmissionBody):
        try:
            return service.submit_part2(session_id, item_id, body.label)
        except Exception as exc:
            raise _http(exc) from exc

    @app.get("/summary")
    def summary():
        try:
            return service.summary()
        except Exception as exc:
            raise _http(exc) from exc

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/app", StaticFiles(directory=str(static_dir), html=True), name="app")

    return app
