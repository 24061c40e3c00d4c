"""Isolated execution of untrusted `generate_series` source code.

One JSON request {"code", "length", "timeout_s"} arrives on stdin; the reply
{"ok": true, "values": [...]} or {"ok": false, "error": "..."} leaves on
stdout; logs go to stderr.  The code itself runs in a separate disposable
interpreter process with:

- a fresh temp working directory and a scrubbed environment,
- RLIMIT_AS (default 512 MB) and RLIMIT_FSIZE=0 (any file write fails),
- sockets disabled before user code runs,
- imports restricted to numpy / math / random / statistics,
- an unconditional wall-clock kill at timeout_s.

This contains straightforwardly misbehaving generated code (loops, writes,
dial-outs, memory balloons); it is not a security boundary against a
determined adversary.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile

MAX_TIMEOUT_S = 60
ADDRESS_SPACE_LIMIT = 512 * 1024 * 1024

# Runs inside the disposable child interpreter (python -I -c BOOTSTRAP).
# Everything is mapped to an in-band {"ok": false} reply; the parent treats a
# crashed child (nonzero exit, e.g. a SIGKILL from the kernel) separately.
CHILD_BOOTSTRAP = r"""
import json, math, signal, sys

def reply(payload):
    sys.stdout.write(json.dumps(payload))
    sys.stdout.flush()
    sys.exit(0)

def fail(kind, message):
    reply({"ok": False, "error": f"{kind}: {message}"})

request = json.load(sys.stdin)
code, length = request["code"], int(request["length"])

import resource
resource.setrlimit(resource.RLIMIT_AS, (%(address_space)d, %(address_space)d))
resource.setrlimit(resource.RLIMIT_FSIZE, (0, 0))
# Make oversized writes raise EFBIG instead of killing the process.
signal.signal(signal.SIGXFSZ, signal.SIG_IGN)

import socket as _socket_module

def _no_network(*args, **kwargs):
    raise PermissionError("network access is disabled in the sandbox")

_socket_module.socket = _no_network
_socket_module.create_connection = _no_network
_socket_module.socketpair = _no_network

import os
os.environ.clear()

ALLOWED_IMPORTS = ("numpy", "math", "random", "statistics")
_real_import = __builtins__.__import__

def _guarded_import(name, *args, **kwargs):
    root = name.split(".")[0]
    if root not in ALLOWED_IMPORTS and root not in sys.modules:
        raise ImportError(f"import of {name!r} is not allowed in the sandbox")
    return _real_import(name, *args, **kwargs)

namespace = {"__builtins__": {**__builtins__.__dict__, "__import__": _guarded_import}}

try:
    exec(compile(code, "<generator>", "exec"), namespace)
except BaseException as exc:
    fail("CompileError", f"{type(exc).__name__}: {exc}")

function = namespace.get("generate_series")
if not callable(function):
    fail("MissingFunction", "code defines no callable named generate_series")

try:
    result = function()
except BaseException as exc:
    fail("CompileError", f"generate_series raised {type(exc).__name__}: {exc}")

try:
    if hasattr(result, "ravel"):
        result = result.ravel().tolist()
    values = [float(v) for v in list(result)]
except BaseException as exc:
    fail("CompileError", f"result is not a flat real sequence: {exc}")

if len(values) != length:
    fail("WrongLength", f"requested {length} values, got {len(values)}")
if not all(math.isfinite(v) for v in values):
    fail("NonFinite", "generated series contains non-finite values")

reply({"ok": True, "values": values})
""" % {"address_space": ADDRESS_SPACE_LIMIT}


def validate_request(request: dict) -> str | None:
    """Error message for a bad request, or None when acceptable."""
    if not isinstance(request, dict):
        return "BadRequest: request must be a JSON object"
    code = request.get("code")
    if not isinstance(code, str) or not code.strip():
        return "BadRequest: code must be a non-empty string"
    length = request.get("length")
    if not isinstance(length, int) or length < 1:
        return "BadRequest: length must be a positive integer"
    timeout_s = request.get("timeout_s")
    if not isinstance(timeout_s, int) or not 1 <= timeout_s <= MAX_TIMEOUT_S:
        return f"BadRequest: timeout_s must be an integer in [1, {MAX_TIMEOUT_S}]"
    return None


def execute(request: dict) -> dict:
    """Run one validated request in a disposable interpreter."""
    problem = validate_request(request)
    if problem:
        return {"ok": False, "error": problem}

    timeout_s = request["timeout_s"]
    child_input = json.dumps({"code": request["code"], "length": request["length"]})
    with tempfile.TemporaryDirectory(prefix="sandbox-") as jail:
        child = subprocess.Popen(
            [sys.executable, "-I", "-c", CHILD_BOOTSTRAP],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            cwd=jail,
            env={"PATH": "/usr/bin:/bin"},
            close_fds=True,
        )
        try:
            stdout, stderr = child.communicate(child_input.encode("utf-8"), timeout=timeout_s)
        except subprocess.TimeoutExpired:
            child.kill()
            child.communicate()
            return {"ok": False, "error": f"Timeout: exceeded {timeout_s}s wall clock"}

    if child.returncode != 0:
        tail = stderr.decode("utf-8", "replace").strip().splitlines()[-1:] or ["no stderr"]
        return {
            "ok": False,
            "error": f"CompileError: execution crashed (status {child.returncode}): {tail[0]}",
        }
    try:
        response = json.loads(stdout.decode("utf-8"))
    except ValueError:
        return {"ok": False, "error": "CompileError: child produced unparseable output"}
    if not isinstance(response, dict) or "ok" not in response:
        return {"ok": False, "error": "CompileError: child produced a malformed reply"}
    return response


def main() -> int:
    """Wire protocol entry: one request on stdin, one reply on stdout."""
    try:
        request = json.load(sys.stdin)
    except ValueError as exc:
        print(f"unparseable request: {exc}", file=sys.stderr)
        return 2
    response = execute(request)
    if not response.get("ok"):
        print(response.get("error", "unknown error"), file=sys.stderr)
    json.dump(response, sys.stdout)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
