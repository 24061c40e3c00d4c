"""Distance measures between forecasts, the normalized synthetic score,
aggregation across series/runs, and Cohen's kappa for the human study.

All distances are scale-independent: sMAPE is the [0, 2]-bounded variant with
the factor 2 inside the mean; NMAE and NRMSE normalize by the mean absolute
value of the reference forecast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BothZero, EmptyInput, LengthMismatch, NonFinite, ZeroReference


@dataclass(frozen=True)
class DistanceReport:
    """One (reference, candidate) comparison under all three distances."""

    smape: float
    nmae: float
    nrmse: float


def _checked_pair(reference: Sequence[float], candidate: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    if len(reference) == 0 or len(candidate) == 0:
        raise EmptyInput("sequences must be non-empty")
    if len(reference) != len(candidate):
        raise LengthMismatch(
            f"length {len(reference)} vs {len(candidate)}"
        )
    r = np.asarray(reference, dtype=float)
    c = np.asarray(candidate, dtype=float)
    if not (np.isfinite(r).all() and np.isfinite(c).all()):
        raise NonFinite("sequences contain non-finite values")
    return r, c


def smape(reference: Sequence[float], candidate: Sequence[float]) -> float:
    """Symmetric mean absolute percentage error, bounded in [0, 2].

    Terms where both values are zero contribute 0 rather than NaN.
    """
    r, c = _checked_pair(reference, candidate)
    denom = np.abs(r) + np.abs(c)
    terms = np.zeros_like(denom)
    nonzero = denom > 0.0
    terms[nonzero] = 2.0 * np.abs(r - c)[nonzero] / denom[nonzero]
    return float(terms.mean())


def _mean_abs_reference(r: np.ndarray) -> float:
    scale = float(np.abs(r).mean())
    if scale == 0.0:
        raise ZeroReference("reference has zero mean absolute value")
    return scale


def nmae(reference: Sequence[float], candidate: Sequence[float]) -> float:
    """Mean absolute error normalized by the reference's mean absolute value."""
    r, c = _checked_pair(reference, candidate)
    return float(np.abs(r - c).mean()) / _mean_abs_reference(r)


def nrmse(reference: Sequence[float], candidate: Sequence[float]) -> float:
    """Root mean squared error normalized by the reference's mean absolute value."""
    r, c = _checked_pair(reference, candidate)
    return math.sqrt(float(((r - c) ** 2).mean())) / _mean_abs_reference(r)


def distance_report(reference: Sequence[float], candidate: Sequence[float]) -> DistanceReport:
    return DistanceReport(
        smape=smape(reference, candidate),
        nmae=nmae(reference, candidate),
        nrmse=nrmse(reference, candidate),
    )


def normalized_synthetic_score(ss_with_explanation: float, ss_baseline: float) -> float:
    """SS_E / (SS_base + SS_E), in [0, 1]; below 0.5 means the explanation helped."""
    if ss_with_explanation < 0 or ss_baseline < 0:
        raise NonFinite("synthetic scores must be non-negative")
    total = ss_with_explanation + ss_baseline
    if total == 0.0:
        raise BothZero("both synthetic scores are zero")
    return ss_with_explanation / total


def aggregate(results: Sequence[DistanceReport], runs: int = 1) -> DistanceReport:
    """Macro-average: mean per metric within each run, then across runs.

    results is run-major (all of run 1's per-series reports, then run 2's,
    ...); every run must contribute the same number of reports.
    """
    if not results:
        raise EmptyInput("no reports to aggregate")
    if runs < 1 or len(results) % runs != 0:
        raise LengthMismatch(
            f"{len(results)} reports cannot be split into {runs} equal runs"
        )
    per_run = len(results) // runs
    chunks = [results[i * per_run : (i + 1) * per_run] for i in range(runs)]

    def run_mean(chunk: Sequence[DistanceReport], metric: str) -> float:
        return sum(getattr(rep, metric) for rep in chunk) / len(chunk)

    return DistanceReport(
        smape=sum(run_mean(ch, "smape") for ch in chunks) / runs,
        nmae=sum(run_mean(ch, "nmae") for ch in chunks) / runs,
        nrmse=sum(run_mean(ch, "nrmse") for ch in chunks) / runs,
    )


def cohen_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Chance-corrected agreement between two binary labelers.

    kappa = (p_o - p_e) / (1 - p_e), with chance agreement p_e from the
    marginal label frequencies.  Returns 1.0 in the degenerate case where
    both raters always emit the same single label (p_e == 1).
    """
    if len(labels_a) == 0 or len(labels_b) == 0:
        raise EmptyInput("label sequences must be non-empty")
    if len(labels_a) != len(labels_b):
        raise LengthMismatch(f"length {len(labels_a)} vs {len(labels_b)}")
    n = len(labels_a)
    p_o = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    classes = set(labels_a) | set(labels_b)
    p_e = sum(
        (sum(a == cls for a in labels_a) / n) * (sum(b == cls for b in labels_b) / n)
        for cls in classes
    )
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)
