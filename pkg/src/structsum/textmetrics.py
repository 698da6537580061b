"""Surface text metrics: tokenization, ROUGE-1/2/L, n-gram source overlap,
and corpus length statistics.

Tokenization is deterministic and dependency-free: lowercase, split on
runs of non-alphanumeric characters, keep digits.  No stemming and no
stopword removal, so absolute values differ from Porter-stemmed official
ROUGE; relative comparisons are unaffected.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

from .core import EmptyCorpus
from .corpus import split_sentences

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

LENGTH_BUCKET_WIDTH = 50


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric tokens, in order; empty text gives []."""
    return _TOKEN_RE.findall(text.lower())


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    if n < 1:
        raise ValueError("n must be positive")
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


@dataclass(frozen=True)
class PRF:
    """Precision / recall / F1 triple, each in [0, 1]."""

    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, match: float, candidate_total: int, reference_total: int) -> "PRF":
        p = match / candidate_total if candidate_total > 0 else 0.0
        r = match / reference_total if reference_total > 0 else 0.0
        f1 = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(precision=p, recall=r, f1=f1)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> PRF:
    """Clipped n-gram matching with multiplicity.

    A side with zero n-grams has its ratio defined as 0.
    """
    cand_counts = Counter(ngrams(candidate, n))
    ref_counts = Counter(ngrams(reference, n))
    match = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    return PRF.from_counts(match, sum(cand_counts.values()), sum(ref_counts.values()))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0] * (len(b) + 1)
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> PRF:
    """Longest-common-subsequence P/R/F1 over whole token sequences."""
    lcs = _lcs_length(candidate, reference)
    return PRF.from_counts(lcs, len(candidate), len(reference))


def ngram_overlap(summary: Sequence[str], source: Sequence[str], n: int) -> float:
    """Fraction of distinct summary n-grams that occur in the source.

    Returns 0.0 when the summary has no n-grams.
    """
    summary_grams = set(ngrams(summary, n))
    if not summary_grams:
        return 0.0
    source_grams = set(ngrams(source, n))
    present = sum(1 for gram in summary_grams if gram in source_grams)
    return present / len(summary_grams)


@dataclass
class LengthStats:
    mean_words: float
    mean_sentences: float
    histogram: dict[int, int]  # bucket lower bound (words) -> count


def length_stats(texts: Sequence[str]) -> LengthStats:
    """Mean word/sentence counts plus a word-count histogram (50-word buckets)."""
    if not texts:
        raise EmptyCorpus("length_stats needs at least one text")
    histogram: dict[int, int] = {}
    total_words = 0
    total_sentences = 0
    for text in texts:
        words = len(tokenize(text))
        total_words += words
        total_sentences += len(split_sentences(text))
        bucket = (words // LENGTH_BUCKET_WIDTH) * LENGTH_BUCKET_WIDTH
        histogram[bucket] = histogram.get(bucket, 0) + 1
    n = len(texts)
    return LengthStats(
        mean_words=total_words / n,
        mean_sentences=total_sentences / n,
        histogram=dict(sorted(histogram.items())),
    )
