"""JSONL corpus ingestion and emission, rule-based sentence splitting, and
the silver-labeling pipeline.

Corpus files hold one JSON object per line with fields ``id``,
``document``, ``reference_summary`` and optional ``prediction``,
``gold_labels``, ``predicted_labels`` (label arrays of canonical strings).
Unknown fields are preserved on read-modify-write.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .core import (
    CorpusRecord,
    CANONICAL_LABELS,
    LabelSequence,
    StructsumError,
    StructureLabel,
    UnknownLabel,
    parse_label,
)


class MalformedLine(StructsumError):
    def __init__(self, line_no: int, reason: str) -> None:
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DuplicateId(StructsumError):
    def __init__(self, record_id: str, line_no: int) -> None:
        self.record_id = record_id
        super().__init__(f"line {line_no}: duplicate record id {record_id!r}")


class ClassifierError(StructsumError):
    """Classification backend failure during silver labeling."""


# Tokens that end with '.' but do not end a sentence.  Motivated by legal
# citation style ("R. v. Smith", "para. 12").
ABBREVIATIONS = frozenset(
    {
        "v.",
        "s.",
        "ss.",
        "no.",
        "mr.",
        "ms.",
        "dr.",
        "hon.",
        "para.",
        "paras.",
        "e.g.",
        "i.e.",
        "etc.",
    }
)

_SINGLE_INITIAL = re.compile(r"[A-Z]\.")
_TERMINATORS = ".?!"


def _guarded(text: str, end: int) -> bool:
    """True if the terminator at ``end`` closes an abbreviation or initial."""
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : end + 1]
    # drop leading punctuation such as an opening parenthesis
    while token and not token[0].isalpha():
        token = token[1:]
    if not token:
        return False
    if token.lower() in ABBREVIATIONS:
        return True
    return _SINGLE_INITIAL.fullmatch(token) is not None


def split_sentences(text: str) -> list[str]:
    """Split text into sentences, keeping every original character.

    A sentence ends after '.', '?' or '!' followed by whitespace and an
    uppercase letter, unless the terminator closes a known abbreviation or
    a single-initial like "R.".  Each returned sentence keeps its trailing
    whitespace, so ``"".join(split_sentences(t)) == t``.
    """
    if not text:
        return []
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINATORS:
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            if j > i + 1 and j < n and text[j].isupper() and not _guarded(text, i):
                sentences.append(text[start:j])
                start = j
                i = j
                continue
        i += 1
    sentences.append(text[start:])
    return sentences


_REQUIRED_FIELDS = ("id", "document", "reference_summary")
_LABEL_FIELDS = ("gold_labels", "predicted_labels")
_CANONICAL_FIELDS = _REQUIRED_FIELDS + ("prediction",) + _LABEL_FIELDS


def _labels_from_json(value: Any, field_name: str, line_no: int) -> LabelSequence:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise MalformedLine(line_no, f"{field_name} must be a list of label strings")
    try:
        return tuple(parse_label(x) for x in value)
    except UnknownLabel as err:
        raise MalformedLine(line_no, f"{field_name}: {err}") from None


def record_from_json_dict(obj: dict[str, Any], line_no: int = 0) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise MalformedLine(line_no, "line is not a JSON object")
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise MalformedLine(line_no, f"missing required field {name!r}")
        if not isinstance(obj[name], str):
            raise MalformedLine(line_no, f"field {name!r} must be a string")
    if not obj["id"]:
        raise MalformedLine(line_no, "field 'id' must be non-empty")
    prediction = obj.get("prediction")
    if prediction is not None and not isinstance(prediction, str):
        raise MalformedLine(line_no, "field 'prediction' must be a string")
    labels: dict[str, LabelSequence | None] = {}
    for name in _LABEL_FIELDS:
        value = obj.get(name)
        labels[name] = None if value is None else _labels_from_json(value, name, line_no)
    extra = {k: v for k, v in obj.items() if k not in _CANONICAL_FIELDS}
    return CorpusRecord(
        id=obj["id"],
        document=obj["document"],
        reference_summary=obj["reference_summary"],
        prediction=prediction,
        gold_labels=labels["gold_labels"],
        predicted_labels=labels["predicted_labels"],
        extra=extra,
    )


def record_to_json_dict(record: CorpusRecord) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": record.id,
        "document": record.document,
        "reference_summary": record.reference_summary,
    }
    if record.prediction is not None:
        obj["prediction"] = record.prediction
    if record.gold_labels is not None:
        obj["gold_labels"] = [label.value for label in record.gold_labels]
    if record.predicted_labels is not None:
        obj["predicted_labels"] = [label.value for label in record.predicted_labels]
    obj.update(record.extra)
    return obj


def read_corpus(path: str | Path) -> Iterator[CorpusRecord]:
    """Stream records from a JSONL corpus file, validating as it goes."""
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedLine(line_no, f"invalid JSON ({err.msg})") from None
            record = record_from_json_dict(obj, line_no)
            if record.id in seen:
                raise DuplicateId(record.id, line_no)
            seen.add(record.id)
            yield record


def load_corpus(path: str | Path) -> list[CorpusRecord]:
    return list(read_corpus(path))


def write_corpus(records: Iterable[CorpusRecord], path: str | Path) -> None:
    """Write records as JSONL; canonical fields first, extras in their order."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record_to_json_dict(record), ensure_ascii=False))
            handle.write("\n")


@dataclass
class SilverLabelReport:
    """Bookkeeping for one silver-labeling pass."""

    labeled: int = 0
    skipped: int = 0
    low_confidence: int = 0
    label_histogram: dict[StructureLabel, int] = field(
        default_factory=lambda: {label: 0 for label in CANONICAL_LABELS}
    )
    mean_confidence: float = 0.0


def _validate_probs(probs: Sequence[Sequence[float]], expected: int) -> None:
    if len(probs) != expected:
        raise ClassifierError(
            f"classifier returned {len(probs)} vectors for {expected} sentences"
        )
    for vec in probs:
        if len(vec) != len(CANONICAL_LABELS):
            raise ClassifierError("classifier vectors must have four entries")


def silver_label(
    records: Iterable[CorpusRecord],
    classifier,
    min_confidence: float = 0.0,
) -> tuple[list[CorpusRecord], SilverLabelReport]:
    """Predict labels for every record lacking gold annotation.

    Each unannotated reference summary is split into sentences and each
    sentence classified; ``predicted_labels`` holds the per-sentence argmax
    (canonical-order tie-break).  Low-confidence records are labeled anyway
    and only tallied.  Records that already carry gold labels pass through
    untouched.
    """
    report = SilverLabelReport()
    out: list[CorpusRecord] = []
    confidence_sum = 0.0
    confidence_count = 0
    for record in records:
        if record.gold_labels is not None:
            report.skipped += 1
            out.append(record)
            continue
        sentences = [s.strip() for s in split_sentences(record.reference_summary)]
        if not sentences:
            report.labeled += 1
            out.append(replace(record, predicted_labels=()))
            continue
        try:
            probs = classifier.classify(sentences)
        except StructsumError:
            raise
        except Exception as err:  # transport/backends are third-party code
            raise ClassifierError(str(err)) from err
        _validate_probs(probs, len(sentences))
        labels = []
        record_min_confidence = 1.0
        for vec in probs:
            top = max(vec)
            labels.append(CANONICAL_LABELS[list(vec).index(top)])
            record_min_confidence = min(record_min_confidence, top)
            confidence_sum += top
            confidence_count += 1
        for label in labels:
            report.label_histogram[label] += 1
        if record_min_confidence < min_confidence:
            report.low_confidence += 1
        report.labeled += 1
        out.append(replace(record, predicted_labels=tuple(labels)))
    if confidence_count:
        report.mean_confidence = confidence_sum / confidence_count
    return out, report
