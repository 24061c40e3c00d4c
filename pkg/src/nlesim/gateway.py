"""Uniform chat-completion layer over remote LLM endpoints.

One gateway instance holds the endpoint registry, a content-addressed disk
cache, per-endpoint rate limiting and retry policy, and a token-usage log.
A scripted backend makes the whole evaluation pipeline reproducible without
any network access.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping, Protocol

import httpx

from .errors import (
    ConfigInvalid,
    EmptyCompletion,
    EndpointUnknown,
    RateLimited,
    ScriptMiss,
    TransportError,
)

DEFAULT_SYSTEM = "You are a helpful assistant."


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 1.0
    top_p: float = 1.0
    repetition_penalty: float = 1.0
    max_tokens: int = 1024
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ConfigInvalid(f"temperature must be >= 0, got {self.temperature}")
        if not 0.0 < self.top_p <= 1.0:
            raise ConfigInvalid(f"top_p must be in (0, 1], got {self.top_p}")
        if self.repetition_penalty < 1.0:
            raise ConfigInvalid(
                f"repetition_penalty must be >= 1, got {self.repetition_penalty}"
            )
        if self.max_tokens < 1:
            raise ConfigInvalid(f"max_tokens must be positive, got {self.max_tokens}")


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    params: GenerationParams
    endpoint_id: str

    def __post_init__(self) -> None:
        if not self.system or not self.user:
            raise ConfigInvalid("system and user messages must be non-empty")


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


ScriptResponse = str | Callable[[ChatRequest], str]


class ScriptedBackend:
    """Deterministic test double: substring patterns mapped to responses.

    A response may be a plain string or a callable receiving the request,
    which lets doubles echo parts of the prompt.  Patterns are tried in
    registration order; the first match wins.
    """

    def __init__(self, script: Mapping[str, ScriptResponse]):
        if len(set(script)) != len(script):
            raise ConfigInvalid("scripted patterns must be distinct")
        self.script = dict(script)
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        haystack = request.system + "\n" + request.user
        for pattern, response in self.script.items():
            if pattern in haystack:
                return response(request) if callable(response) else response
        raise ScriptMiss(f"no scripted pattern matches request to {request.endpoint_id!r}")


class OpenAIChatBackend:
    """OpenAI-compatible /chat/completions endpoint; key read from the
    environment, never from config files or logs."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str | None = None,
        timeout: float = 60.0,
    ):
        self.model = model
        self.api_key_env = api_key_env
        self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def complete(self, request: ChatRequest) -> str:
        headers = {}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if not key:
                raise ConfigInvalid(f"environment variable {self.api_key_env} is unset")
            headers["Authorization"] = f"Bearer {key}"
        body: dict = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.params.temperature,
            "top_p": request.params.top_p,
            "max_tokens": request.params.max_tokens,
        }
        if request.params.repetition_penalty != 1.0:
            body["repetition_penalty"] = request.params.repetition_penalty
        if request.params.seed is not None:
            body["seed"] = request.params.seed
        try:
            response = self._client.post("/chat/completions", json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code == 429:
            raise RateLimited("endpoint returned 429")
        if response.status_code != 200:
            raise TransportError(f"status {response.status_code}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError("malformed completion body") from exc


@dataclass
class Endpoint:
    id: str
    backend: Backend
    default_params: GenerationParams = GenerationParams()
    requests_per_minute: int | None = None


class RateLimiter:
    """Sliding-window limiter: never more than max_per_minute sends in any
    60 s window.  Clock and sleep are injectable for simulated-time tests."""

    def __init__(
        self,
        max_per_minute: int,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.max_per_minute = max_per_minute
        self.clock = clock
        self.sleep = sleep
        self._sent: list[float] = []
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self.clock()
                self._sent = [t for t in self._sent if now - t < 60.0]
                if len(self._sent) < self.max_per_minute:
                    self._sent.append(now)
                    return
                wait = 60.0 - (now - self._sent[0])
            self.sleep(max(wait, 0.001))


class CompletionCache:
    """One file per key under cache_dir: a JSON metadata header line followed
    by the raw completion text.  Writes go through a temp file + rename so
    concurrent readers never see partial content."""

    def __init__(self, cache_dir: str | Path):
        self.dir = Path(cache_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.txt"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        if not path.exists():
            return None
        header, _, text = path.read_text(encoding="utf-8").partition("\n")
        json.loads(header)  # corrupt header should fail loudly
        return text

    def put(self, key: str, text: str, meta: dict) -> None:
        with self._lock:
            tmp = self._path(key).with_suffix(".tmp")
            tmp.write_text(json.dumps(meta) + "\n" + text, encoding="utf-8")
            tmp.replace(self._path(key))


def _approx_tokens(text: str) -> int:
    return max(1, len(text) // 4)


class LLMGateway:
    """Front door for every completion the pipelines issue."""

    def __init__(
        self,
        cache_dir: str | Path | None = None,
        max_retries: int = 3,
        backoff_s: float = 0.1,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.endpoints: dict[str, Endpoint] = {}
        self.cache = CompletionCache(cache_dir) if cache_dir else None
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.sleep = sleep
        self.clock = clock
        self.usage_log: list[dict] = []
        self._limiters: dict[str, RateLimiter] = {}
        self._scripted_count = 0

    def register(self, endpoint: Endpoint) -> None:
        self.endpoints[endpoint.id] = endpoint
        if endpoint.requests_per_minute:
            self._limiters[endpoint.id] = RateLimiter(
                endpoint.requests_per_minute, clock=self.clock, sleep=self.sleep
            )

    def register_scripted_backend(
        self,
        script: Mapping[str, ScriptResponse],
        endpoint_id: str | None = None,
        default_params: GenerationParams = GenerationParams(),
    ) -> str:
        """Register a ScriptedBackend and return its endpoint id."""
        if endpoint_id is None:
            endpoint_id = f"scripted-{self._scripted_count}"
            self._scripted_count += 1
        self.register(
            Endpoint(id=endpoint_id, backend=ScriptedBackend(script), default_params=default_params)
        )
        return endpoint_id

    def default_params(self, endpoint_id: str) -> GenerationParams:
        endpoint = self.endpoints.get(endpoint_id)
        if endpoint is None:
            raise EndpointUnknown(f"endpoint {endpoint_id!r} not registered")
        return endpoint.default_params

    def request(
        self, endpoint_id: str, user: str,
        system: str = DEFAULT_SYSTEM, seed: int | None = None,
    ) -> ChatRequest:
        """Build a request carrying the endpoint's default params plus a seed."""
        params = self.default_params(endpoint_id)
        if seed is not None:
            params = replace(params, seed=seed)
        return ChatRequest(system=system, user=user, params=params, endpoint_id=endpoint_id)

    @staticmethod
    def cache_key(request: ChatRequest) -> str:
        payload = json.dumps(
            {
                "endpoint": request.endpoint_id,
                "system": request.system,
                "user": request.user,
                "params": {
                    "temperature": request.params.temperature,
                    "top_p": request.params.top_p,
                    "repetition_penalty": request.params.repetition_penalty,
                    "max_tokens": request.params.max_tokens,
                    "seed": request.params.seed,
                },
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def complete(self, request: ChatRequest) -> str:
        """Resolve a completion: cache, then backend with retry + backoff."""
        endpoint = self.endpoints.get(request.endpoint_id)
        if endpoint is None:
            raise EndpointUnknown(f"endpoint {request.endpoint_id!r} not registered")

        key = self.cache_key(request)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached

        limiter = self._limiters.get(request.endpoint_id)
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self.sleep(self.backoff_s * (2 ** (attempt - 1)))
            if limiter is not None:
                limiter.acquire()
            try:
                text = endpoint.backend.complete(request)
                break
            except (TransportError, RateLimited) as exc:
                last_error = exc
        else:
            raise last_error  # retries exhausted; RateLimited or TransportError

        if not text or not text.strip():
            raise EmptyCompletion(f"endpoint {request.endpoint_id!r} returned empty text")
        meta = {
            "timestamp": self.clock(),
            "endpoint": request.endpoint_id,
            "prompt_tokens": _approx_tokens(request.system + request.user),
            "completion_tokens": _approx_tokens(text),
        }
        self.usage_log.append(meta)
        if self.cache is not None:
            self.cache.put(key, text, meta)
        return text
