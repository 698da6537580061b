"""Build and parse structure prompts.

A structure prompt is the summary-side label sequence joined with " | ",
then the marker "==>", then the source document, e.g.::

    Issue | Conclusion | Conclusion | Reason ==> The parties began ...

Prompts never normalize: Non_IRC labels are kept so the model sees the
full per-sentence blueprint.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from .core import (
    CorpusRecord,
    LabelSequence,
    StructsumError,
    StructureLabel,
    UnknownLabel,
)

DEFAULT_MARKER = "==>"
DEFAULT_LABEL_SEPARATOR = " | "


class EmptyLabels(StructsumError):
    """A prompt was requested for an empty label sequence."""


class EmptyDocument(StructsumError):
    """A prompt was requested for an empty document."""


class NoMarker(StructsumError):
    """Prompt text does not contain the configured marker."""


class MissingLabels(StructsumError):
    """The record does not carry the requested label source."""

    def __init__(self, source: str) -> None:
        self.source = source
        super().__init__(f"record has no {source} labels")


@dataclass(frozen=True)
class PromptConfig:
    label_separator: str = DEFAULT_LABEL_SEPARATOR
    marker: str = DEFAULT_MARKER
    label_surface_overrides: dict[StructureLabel, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.label_separator or not self.marker:
            raise ValueError("separator and marker must be non-empty")
        if self.marker in self.label_separator or self.label_separator in self.marker:
            raise ValueError("separator and marker must not contain each other")

    def surface(self, label: StructureLabel) -> str:
        return self.label_surface_overrides.get(label, label.value)

    def parse_surface(self, token: str) -> StructureLabel:
        token = token.strip()
        for label in StructureLabel:
            if self.surface(label) == token:
                return label
        raise UnknownLabel(token)


def build_prompt(
    labels: Sequence[StructureLabel], document: str, cfg: PromptConfig = PromptConfig()
) -> str:
    """Prepend the label sequence and marker to the document.

    Exactly one space on each side of the marker; no trailing separator.
    """
    if not labels:
        raise EmptyLabels("cannot build a prompt from zero labels")
    if not document:
        raise EmptyDocument("cannot build a prompt for an empty document")
    head = cfg.label_separator.join(cfg.surface(label) for label in labels)
    return f"{head} {cfg.marker} {document}"


def parse_prompt(
    prompted: str, cfg: PromptConfig = PromptConfig()
) -> tuple[LabelSequence, str]:
    """Invert :func:`build_prompt`, splitting on the first marker occurrence.

    The document side is returned verbatim, so documents that themselves
    contain the marker survive the round-trip.
    """
    needle = f" {cfg.marker} "
    head, sep, document = prompted.partition(needle)
    if not sep:
        raise NoMarker(f"prompt does not contain {needle!r}")
    labels = []
    for position, token in enumerate(head.split(cfg.label_separator), start=1):
        try:
            labels.append(cfg.parse_surface(token))
        except UnknownLabel as err:
            raise UnknownLabel(err.token, position) from None
    return tuple(labels), document


def prompt_for_record(
    record: CorpusRecord,
    source: str | Sequence[StructureLabel] = "gold",
    cfg: PromptConfig = PromptConfig(),
) -> str:
    """Build the prompt for a record from gold, predicted, or custom labels.

    ``source`` is "gold", "predicted", or an explicit label sequence.
    """
    if isinstance(source, str):
        if source == "gold":
            labels = record.gold_labels
        elif source == "predicted":
            labels = record.predicted_labels
        else:
            raise ValueError(f"unknown label source {source!r}")
        if labels is None:
            raise MissingLabels(source)
    else:
        labels = tuple(source)
        if not labels:
            raise MissingLabels("custom")
    return build_prompt(labels, record.document, cfg)
