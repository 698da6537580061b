"""Paired bootstrap confidence intervals for per-record metric differences.

The resampling is percentile bootstrap over mean(a_i - b_i).  Draws come
from a fully documented splitmix64 scheme so any independent
implementation reproduces them bit-for-bit:

* GOLDEN = 0x9E3779B97F4A7C15; all arithmetic is modulo 2**64.
* mix64 is the splitmix64 finalizer:
  ``z ^= z >> 30; z *= 0xBF58476D1CE4B5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31``.
* Resample ``r`` (0-based) of ``n`` paired differences starts a stream at
  ``state = seed + (r + 1) * GOLDEN``; each of its ``n`` draws advances
  ``state += GOLDEN`` and yields index ``mix64(state) % n``.

Because every resample seeds its own stream from the resample counter,
batches may be computed in parallel without changing results.  Confidence
interval endpoints are type-7 (linear interpolation) quantiles of the
sorted resampled means at levels (1 +/- confidence) / 2.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .core import EmptyCorpus, IdMismatch, StructsumError

_MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class UnknownMetric(StructsumError):
    def __init__(self, metric: str, known: Sequence[str]) -> None:
        self.metric = metric
        super().__init__(f"unknown metric {metric!r}; known: {', '.join(known)}")


@dataclass(frozen=True)
class PairedSamples:
    """Per-record metric values for two systems, aligned by id."""

    ids: tuple[str, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.ids) == len(self.a) == len(self.b)):
            raise ValueError("ids, a, and b must have equal lengths")
        if len(self.ids) == 0:
            raise ValueError("paired samples need at least one record")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("record ids must be unique")


@dataclass(frozen=True)
class BootstrapResult:
    mean_diff: float
    ci_low: float
    ci_high: float
    confidence: float
    resamples: int
    significant: bool

    def to_json_dict(self) -> dict:
        return {
            "mean_diff": self.mean_diff,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "resamples": self.resamples,
            "significant": self.significant,
        }


def mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def resample_indices(seed: int, resample: int, n: int) -> list[int]:
    """Index multiset for one bootstrap resample, per the documented scheme."""
    state = (seed + (resample + 1) * GOLDEN) & _MASK64
    indices = []
    for _ in range(n):
        state = (state + GOLDEN) & _MASK64
        indices.append(mix64(state) % n)
    return indices


def quantile_type7(sorted_values: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile of an already sorted sequence."""
    n = len(sorted_values)
    if n == 1:
        return sorted_values[0]
    h = (n - 1) * q
    lo = math.floor(h)
    if lo >= n - 1:
        return sorted_values[n - 1]
    frac = h - lo
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])


def paired_bootstrap(
    samples: PairedSamples,
    confidence: float = 0.95,
    resamples: int = 1000,
    seed: int = 0,
) -> BootstrapResult:
    """Percentile bootstrap CI for the mean per-record difference a - b."""
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    if resamples < 1:
        raise ValueError("resamples must be positive")
    diffs = [x - y for x, y in zip(samples.a, samples.b)]
    n = len(diffs)
    means = []
    for r in range(resamples):
        total = 0.0
        for i in resample_indices(seed, r, n):
            total += diffs[i]
        means.append(total / n)
    means.sort()
    lower = (1.0 - confidence) / 2.0
    ci_low = quantile_type7(means, lower)
    ci_high = quantile_type7(means, 1.0 - lower)
    return BootstrapResult(
        mean_diff=sum(diffs) / n,
        ci_low=ci_low,
        ci_high=ci_high,
        confidence=confidence,
        resamples=resamples,
        significant=not (ci_low <= 0.0 <= ci_high),
    )


def compare_reports(
    a,
    b,
    metric: str,
    confidence: float = 0.95,
    resamples: int = 1000,
    seed: int = 0,
) -> BootstrapResult:
    """Paired bootstrap over one metric of two evaluation reports.

    Records are aligned by id over the subset where the metric is present
    in both reports; any id with the metric in only one report is a
    mismatch.
    """
    from .evaluation import METRIC_NAMES, record_metric

    if metric not in METRIC_NAMES:
        raise UnknownMetric(metric, METRIC_NAMES)
    values_a = {
        m.id: v for m in a.per_record if (v := record_metric(m, metric)) is not None
    }
    values_b = {
        m.id: v for m in b.per_record if (v := record_metric(m, metric)) is not None
    }
    if set(values_a) != set(values_b):
        raise IdMismatch(sorted(set(values_a) ^ set(values_b)))
    if not values_a:
        raise EmptyCorpus(f"metric {metric!r} is present on no record")
    ids = tuple(m.id for m in a.per_record if m.id in values_a)
    samples = PairedSamples(
        ids=ids,
        a=tuple(values_a[i] for i in ids),
        b=tuple(values_b[i] for i in ids),
    )
    return paired_bootstrap(samples, confidence=confidence, resamples=resamples, seed=seed)
