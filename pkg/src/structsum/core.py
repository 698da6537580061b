"""Shared vocabulary for structure-controlled summarization.

Argument-role labels, label sequences, corpus records, and generation
parameters used by every other module.  All types are immutable values and
safe to share across threads.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any


class StructsumError(Exception):
    """Base class for all errors raised by this toolkit."""


class UnknownLabel(StructsumError):
    """A string does not name one of the four structure labels."""

    def __init__(self, token: str, position: int | None = None) -> None:
        self.token = token
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"unknown structure label {token!r}{where}")


class EmptyCorpus(StructsumError):
    """A corpus-level operation received zero records."""


class IdMismatch(StructsumError):
    """Two record sets that must align by id do not."""

    def __init__(self, missing: Sequence[str]) -> None:
        self.missing = tuple(missing)
        shown = ", ".join(self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
        super().__init__(f"record ids do not align: {shown}{more}")


class StructureLabel(enum.Enum):
    """Argument roles for legal summary sentences.

    Issue is the legal question addressed in the case, Conclusion the
    court's decision on an issue, Reason a snippet supporting the decision,
    and Non_IRC anything else.  Member order is the canonical index order
    used by classifier probability vectors.
    """

    ISSUE = "Issue"
    CONCLUSION = "Conclusion"
    REASON = "Reason"
    NON_IRC = "Non_IRC"

    @property
    def index(self) -> int:
        """Position in the canonical order Issue, Conclusion, Reason, Non_IRC."""
        return _LABEL_INDEX[self]

    def __str__(self) -> str:
        return self.value


CANONICAL_LABELS: tuple[StructureLabel, ...] = tuple(StructureLabel)

_LABEL_INDEX = {label: i for i, label in enumerate(CANONICAL_LABELS)}
_BY_SURFACE = {label.value: label for label in CANONICAL_LABELS}

# An ordered sequence of structure labels; duplicates allowed, may be empty.
LabelSequence = tuple[StructureLabel, ...]

DEFAULT_SEPARATOR = " | "


def parse_label(s: str) -> StructureLabel:
    """Parse one canonical label string.

    Surrounding whitespace is trimmed; matching is case-sensitive because
    prompts are fed verbatim to models.
    """
    token = s.strip()
    try:
        return _BY_SURFACE[token]
    except KeyError:
        raise UnknownLabel(token) from None


def parse_label_sequence(s: str, sep: str = DEFAULT_SEPARATOR) -> LabelSequence:
    """Split ``s`` on ``sep`` and parse every token as a label.

    The empty string yields the empty sequence.  Unknown tokens raise
    :class:`UnknownLabel` carrying the 1-based token position.
    """
    if not sep:
        raise ValueError("separator must be non-empty")
    if s == "":
        return ()
    labels = []
    for position, token in enumerate(s.split(sep), start=1):
        try:
            labels.append(parse_label(token))
        except UnknownLabel as err:
            raise UnknownLabel(err.token, position) from None
    return tuple(labels)


def join_labels(labels: Sequence[StructureLabel], sep: str = DEFAULT_SEPARATOR) -> str:
    """Render labels as canonical surface strings joined by ``sep``."""
    return sep.join(label.value for label in labels)


@dataclass(frozen=True)
class CorpusRecord:
    """One case/summary pair with optional labels and model prediction.

    ``extra`` carries unknown JSONL fields so read-modify-write cycles
    preserve them.
    """

    id: str
    document: str
    reference_summary: str
    prediction: str | None = None
    gold_labels: LabelSequence | None = None
    predicted_labels: LabelSequence | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("record id must be non-empty")


@dataclass(frozen=True)
class GenerationParams:
    """Decoding knobs handed through to the scorer backend.

    Defaults: 4 candidate generations, beam size 2, top-p 0.9, 64/256
    min/max output tokens, length penalty 1.0.
    """

    num_candidates: int = 4
    beam_size: int = 2
    top_p: float = 0.9
    min_tokens: int = 64
    max_tokens: int = 256
    length_penalty: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be positive")
        if self.beam_size < 1:
            raise ValueError("beam_size must be positive")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must be in (0, 1]")
        if self.min_tokens < 0:
            raise ValueError("min_tokens must be non-negative")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")
        if self.min_tokens > self.max_tokens:
            raise ValueError("min_tokens must not exceed max_tokens")
        if self.length_penalty <= 0.0:
            raise ValueError("length_penalty must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
