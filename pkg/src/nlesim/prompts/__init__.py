"""Prompt templates, stored verbatim as package data.

Each template is a .txt file with named {slot} placeholders.  render() fails
loudly on missing or unexpected slots so wiring bugs surface in tests rather
than as silently malformed prompts.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

TEMPLATE_NAMES = (
    "llmtime_plain",
    "llmtime_with_tip",
    "llmtime_monotone",
    "forecast_tip",
    "series_generator",
    "segment_analysis",
    "history_analysis",
    "forecast_explanation",
)

_SLOT_RE = re.compile(r"\{([a-z_]+)\}")


@lru_cache(maxsize=None)
def template(name: str) -> str:
    """Raw template text (single trailing newline stripped)."""
    if name not in TEMPLATE_NAMES:
        raise KeyError(f"unknown prompt template {name!r}")
    text = resources.files(__package__).joinpath(f"{name}.txt").read_text(encoding="utf-8")
    return text.removesuffix("\n")


def slots(name: str) -> set[str]:
    """Slot names a template expects."""
    return set(_SLOT_RE.findall(template(name)))


def render(name: str, **values: str) -> str:
    """Substitute every slot of the named template."""
    expected = slots(name)
    given = set(values)
    if given != expected:
        raise KeyError(
            f"template {name!r} expects slots {sorted(expected)}, got {sorted(given)}"
        )
    text = template(name)
    for slot, value in values.items():
        text = text.replace("{" + slot + "}", str(value))
    return text
