"""Exception types raised across the package.

Grouped by the subsystem that raises them; all inherit from NlesimError so
callers can catch the whole family at pipeline boundaries.
"""


class NlesimError(Exception):
    """Base class for every error raised by this package."""


# --- series / segmentation ---------------------------------------------------

class EmptySeries(NlesimError):
    pass


class NonFinite(NlesimError):
    pass


class InvalidRange(NlesimError):
    pass


class InsufficientNumbers(NlesimError):
    """Fewer numbers found in a text than the caller required."""


# --- metrics ------------------------------------------------------------------

class LengthMismatch(NlesimError):
    pass


class EmptyInput(NlesimError):
    pass


class ZeroReference(NlesimError):
    """Reference sequence has zero mean absolute value; normalization undefined."""


class BothZero(NlesimError):
    """Both synthetic scores are zero; the normalized score is undefined."""


# --- forecasters ----------------------------------------------------------------

class HistoryTooShort(NlesimError):
    pass


class ExternalUnavailable(NlesimError):
    """External forecaster endpoint unreachable or timed out."""


class MalformedResponse(NlesimError):
    pass


class NonFiniteOutput(NlesimError):
    pass


# --- llm gateway ----------------------------------------------------------------

class EndpointUnknown(NlesimError):
    pass


class RateLimited(NlesimError):
    """Endpoint kept refusing after all retries."""


class TransportError(NlesimError):
    pass


class EmptyCompletion(NlesimError):
    pass


class ScriptMiss(NlesimError):
    """Scripted backend had no pattern matching the request."""


# --- explainer / surrogate --------------------------------------------------------

class ChainAborted(NlesimError):
    """An explanation chain stage produced an empty completion."""


class ParseFailed(NlesimError):
    """Surrogate completion never yielded enough numbers, retries exhausted."""


# --- simulatability ----------------------------------------------------------------

class NoGeneratorTag(NlesimError):
    pass


class EmptyCode(NlesimError):
    pass


class CodegenFailed(NlesimError):
    """Series-generator code could not be obtained and executed, retries exhausted."""


class ExecutorFailed(NlesimError):
    pass


class NonFiniteSeries(NlesimError):
    pass


# --- datasets -------------------------------------------------------------------

class MalformedHeader(NlesimError):
    pass


class MalformedRow(NlesimError):
    pass


class MissingValues(NlesimError):
    """A series contains '?' placeholders."""


class EmptyFile(NlesimError):
    pass


class NoSeriesLeft(NlesimError):
    pass


# --- harness --------------------------------------------------------------------

class ConfigInvalid(NlesimError):
    pass


class EmptyLedger(NlesimError):
    pass


# --- study service ----------------------------------------------------------------

class ConsentMissing(NlesimError):
    pass


class ItemBankEmpty(NlesimError):
    pass


class WrongOrder(NlesimError):
    pass


class WrongLength(NlesimError):
    pass


class DuplicateSubmission(NlesimError):
    pass


class NoCompletedSessions(NlesimError):
    pass
