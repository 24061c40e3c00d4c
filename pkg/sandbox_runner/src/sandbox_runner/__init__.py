"""Subprocess runner executing untrusted series-generator code under
resource limits, speaking a one-shot JSON protocol on stdin/stdout."""

from .runner import execute, main, validate_request

__all__ = ["execute", "main", "validate_request"]
