"""Metrics over label sequences.

Pattern normalization drops the Non_IRC labels first and then collapses
runs of equal adjacent labels, so a sequence like Issue, Non_IRC, Issue
counts as the single-Issue pattern.  Structure similarity is
``1 - edit_distance / max(len)`` over raw per-sentence sequences, with
unit costs for insert, delete, and replace.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .core import EmptyCorpus, LabelSequence, StructureLabel

PATTERN_SEPARATOR = "|"


def _collapse_adjacent(labels: Sequence[StructureLabel]) -> LabelSequence:
    out: list[StructureLabel] = []
    for label in labels:
        if not out or out[-1] is not label:
            out.append(label)
    return tuple(out)


def normalize_pattern(
    seq: Sequence[StructureLabel], collapse_first: bool = False
) -> LabelSequence:
    """Remove Non_IRC labels and collapse adjacent duplicates.

    ``collapse_first`` flips the two stages for sensitivity analysis; the
    default order (remove, then collapse) also merges duplicates that the
    removal uncovers, while the flipped order keeps them.
    """
    if collapse_first:
        collapsed = _collapse_adjacent(seq)
        return tuple(x for x in collapsed if x is not StructureLabel.NON_IRC)
    kept = [label for label in seq if label is not StructureLabel.NON_IRC]
    return _collapse_adjacent(kept)


def dedupe_segments(seq: Sequence[StructureLabel]) -> LabelSequence:
    """Collapse adjacent duplicates only, keeping Non_IRC labels.

    This is the segment-ctrl view of a structure: one entry per span of
    repeated labels.
    """
    return _collapse_adjacent(seq)


def levenshtein(a: Sequence[StructureLabel], b: Sequence[StructureLabel]) -> int:
    """Unit-cost edit distance between two label sequences."""
    if len(a) < len(b):
        a, b = b, a
    # two rolling rows over the shorter sequence
    previous = list(range(len(b) + 1))
    for i, label_a in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, label_b in enumerate(b, start=1):
            cost = 0 if label_a is label_b else 1
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + cost,
            )
        previous = current
    return previous[-1]


def structure_similarity(
    system: Sequence[StructureLabel],
    oracle: Sequence[StructureLabel],
    normalized: bool = False,
) -> float:
    """Similarity in [0, 1]: ``1 - levenshtein / max(len)``.

    Two empty sequences are identical and score 1.0.  With ``normalized``
    both sides are pattern-normalized before scoring; the default scores
    the raw per-sentence sequences.
    """
    if normalized:
        system = normalize_pattern(system)
        oracle = normalize_pattern(oracle)
    longest = max(len(system), len(oracle))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(system, oracle) / longest


def corpus_similarity(
    pairs: Sequence[tuple[Sequence[StructureLabel], Sequence[StructureLabel]]],
    normalized: bool = False,
) -> float:
    """Arithmetic mean of :func:`structure_similarity` over (system, oracle) pairs."""
    if not pairs:
        raise EmptyCorpus("corpus_similarity needs at least one pair")
    total = sum(structure_similarity(s, o, normalized=normalized) for s, o in pairs)
    return total / len(pairs)


def render_pattern(seq: Sequence[StructureLabel]) -> str:
    """Render a sequence as its pattern key, e.g. ``Issue|Conclusion|Reason``."""
    return PATTERN_SEPARATOR.join(label.value for label in seq)


@dataclass
class PatternDistribution:
    """Occurrence counts of normalized patterns over a corpus."""

    counts: dict[str, int]
    total: int

    def entries(self) -> list[tuple[str, int, float]]:
        """(pattern, count, share) sorted by descending count, then pattern."""
        ordered = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(key, count, count / self.total) for key, count in ordered]

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "patterns": [
                {"pattern": key, "count": count, "share": share}
                for key, count, share in self.entries()
            ],
        }


def pattern_distribution(corpus: Sequence[Sequence[StructureLabel]]) -> PatternDistribution:
    """Count normalized patterns over every sequence in the corpus."""
    if not corpus:
        raise EmptyCorpus("pattern_distribution needs at least one sequence")
    counts: dict[str, int] = {}
    for seq in corpus:
        key = render_pattern(normalize_pattern(seq))
        counts[key] = counts.get(key, 0) + 1
    return PatternDistribution(counts=counts, total=len(corpus))
