from __future__ import annotations

from pathlib import Path

import pytest

from nlesim.gateway import LLMGateway
from nlesim.hermetic import register_oracle_endpoints

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def oracle_setup():
    """Gateway with the scripted oracle endpoints registered."""
    gateway = LLMGateway()
    roles = register_oracle_endpoints(gateway)
    return gateway, roles


class LocalExecutor:
    """Trusted in-process executor for fixture generator code written by the
    tests themselves.  Untrusted execution is the sandbox runner's job."""

    def __init__(self):
        self.calls = 0

    def run(self, code: str, length: int, timeout_s: int) -> list[float]:
        self.calls += 1
        namespace: dict = {}
        exec(code, namespace)  # noqa: S102 - test fixture code only
        return [float(v) for v in namespace["generate_series"]()]


@pytest.fixture
def local_executor() -> LocalExecutor:
    return LocalExecutor()
