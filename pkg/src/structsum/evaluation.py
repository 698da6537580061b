"""Per-record and aggregate evaluation reports, plus the end-to-end
generate-then-evaluate pipeline.

A report carries ROUGE-1/2/L precision/recall/F1, optional structure
similarity, word lengths, and optional source-overlap ratios per record,
with aggregate values that are plain arithmetic means over the records
where each field is present.  ``external`` is a pass-through slot for
metric values computed outside this toolkit (e.g. BERTScore).
"""

from __future__ import annotations

import csv
import io
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

from . import __version__
from .core import (
    CANONICAL_LABELS,
    CorpusRecord,
    EmptyCorpus,
    IdMismatch,
    LabelSequence,
    StructureLabel,
)
from .corpus import split_sentences
from .decoding import (
    DecodeConfig,
    decode_sentbs,
    decode_unconstrained,
)
from .prompting import MissingLabels, PromptConfig, build_prompt
from .scorers import Scorer, ScorerError
from .structure import corpus_similarity, structure_similarity
from .textmetrics import PRF, ngram_overlap, rouge_l, rouge_n, tokenize


@dataclass(frozen=True)
class OverlapRatios:
    n1: float
    n2: float
    n3: float


@dataclass
class RecordMetrics:
    id: str
    rouge1: PRF
    rouge2: PRF
    rougeL: PRF
    structure_similarity: float | None
    prediction_length_words: int
    overlap: OverlapRatios | None = None


@dataclass
class EvalReport:
    per_record: list[RecordMetrics]
    aggregate: dict[str, float | None]
    wall_clock_seconds: float
    config: dict[str, Any] = field(default_factory=dict)
    external: dict[str, float] | None = None


# flat metric names usable with ``compare --metric`` and in CSV headers
METRIC_NAMES = (
    "rouge1.p",
    "rouge1.r",
    "rouge1.f1",
    "rouge2.p",
    "rouge2.r",
    "rouge2.f1",
    "rougeL.p",
    "rougeL.r",
    "rougeL.f1",
    "structure_similarity",
    "prediction_length_words",
    "overlap.n1",
    "overlap.n2",
    "overlap.n3",
)


def record_metric(metrics: RecordMetrics, name: str) -> float | None:
    """Look up one flat metric name on a record's metrics, or None if absent."""
    head, _, tail = name.partition(".")
    if head in ("rouge1", "rouge2", "rougeL"):
        prf: PRF = getattr(metrics, head)
        return {"p": prf.precision, "r": prf.recall, "f1": prf.f1}[tail]
    if name == "structure_similarity":
        return metrics.structure_similarity
    if name == "prediction_length_words":
        return float(metrics.prediction_length_words)
    if head == "overlap":
        if metrics.overlap is None:
            return None
        return getattr(metrics.overlap, tail)
    raise KeyError(name)


def aggregate_metrics(per_record: Sequence[RecordMetrics]) -> dict[str, float | None]:
    """Arithmetic means over records where each field is present."""
    out: dict[str, float | None] = {}
    for name in METRIC_NAMES:
        values = [v for m in per_record if (v := record_metric(m, name)) is not None]
        out[name] = sum(values) / len(values) if values else None
    return out


def _argmax_label(vec: Sequence[float]) -> StructureLabel:
    values = list(vec)
    return CANONICAL_LABELS[values.index(max(values))]


def _score_record(
    record: CorpusRecord,
    classifier,
    overlap: bool,
) -> RecordMetrics:
    assert record.prediction is not None
    cand = tokenize(record.prediction)
    ref = tokenize(record.reference_summary)
    predicted = record.predicted_labels
    if predicted is None and classifier is not None:
        sentences = [s.strip() for s in split_sentences(record.prediction)]
        probs = classifier.classify(sentences) if sentences else []
        predicted = tuple(_argmax_label(vec) for vec in probs)
    similarity = None
    if predicted is not None and record.gold_labels is not None:
        similarity = structure_similarity(predicted, record.gold_labels)
    ratios = None
    if overlap:
        source = tokenize(record.document)
        ratios = OverlapRatios(
            n1=ngram_overlap(cand, source, 1),
            n2=ngram_overlap(cand, source, 2),
            n3=ngram_overlap(cand, source, 3),
        )
    return RecordMetrics(
        id=record.id,
        rouge1=rouge_n(cand, ref, 1),
        rouge2=rouge_n(cand, ref, 2),
        rougeL=rouge_l(cand, ref),
        structure_similarity=similarity,
        prediction_length_words=len(cand),
        overlap=ratios,
    )


def merge_predictions(
    records: Sequence[CorpusRecord], predictions: dict[str, str]
) -> list[CorpusRecord]:
    """Attach predictions from an {id: text} mapping onto records."""
    known = {record.id for record in records}
    unknown = [record_id for record_id in predictions if record_id not in known]
    if unknown:
        raise IdMismatch(sorted(unknown))
    return [
        replace(record, prediction=predictions[record.id])
        if record.id in predictions
        else record
        for record in records
    ]


def evaluate_records(
    records: Sequence[CorpusRecord],
    classifier=None,
    overlap: bool = False,
    workers: int = 1,
    config: dict[str, Any] | None = None,
    timer: Callable[[], float] = time.perf_counter,
) -> EvalReport:
    """Score every record's prediction against its reference summary."""
    if not records:
        raise EmptyCorpus("evaluate needs at least one record")
    missing = [record.id for record in records if record.prediction is None]
    if missing:
        raise IdMismatch(missing)
    started = timer()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_record = list(
                pool.map(lambda r: _score_record(r, classifier, overlap), records)
            )
    else:
        per_record = [_score_record(r, classifier, overlap) for r in records]
    return EvalReport(
        per_record=per_record,
        aggregate=aggregate_metrics(per_record),
        wall_clock_seconds=timer() - started,
        config={"version": __version__, **(config or {})},
    )


def structure_upper_bound(records: Sequence[CorpusRecord], classifier) -> float:
    """Similarity ceiling imposed by the classifier itself.

    Classifies the human reference sentences of records with gold labels
    and scores the predictions against the gold sequences; a generation
    system cannot be measured above this with the same classifier.
    """
    pairs = []
    for record in records:
        if record.gold_labels is None:
            continue
        sentences = [s.strip() for s in split_sentences(record.reference_summary)]
        if not sentences:
            continue
        probs = classifier.classify(sentences)
        predicted = tuple(_argmax_label(vec) for vec in probs)
        pairs.append((predicted, record.gold_labels))
    if not pairs:
        raise EmptyCorpus("no records with gold labels")
    return corpus_similarity(pairs)


# -- end-to-end pipeline -----------------------------------------------------

END_TO_END_MODES = ("sentbs", "nostructure", "prompted")


def _structure_for(record: CorpusRecord, source: str) -> LabelSequence | None:
    if source == "gold":
        return record.gold_labels
    if source == "predicted":
        return record.predicted_labels
    raise ValueError(f"unknown structure source {source!r}")


def _decode_record(
    record: CorpusRecord,
    scorer: Scorer,
    mode: str,
    source: str,
    decode_cfg: DecodeConfig,
    prompt_cfg: PromptConfig,
    timer: Callable[[], float],
) -> CorpusRecord:
    labels = _structure_for(record, source)
    if mode == "sentbs":
        if not labels:
            raise MissingLabels(source)
        trace = decode_sentbs(record.document, labels, scorer, decode_cfg, timer)
    elif mode == "nostructure":
        trace = decode_unconstrained(record.document, scorer, decode_cfg, timer)
    elif mode == "prompted":
        if not labels:
            raise MissingLabels(source)
        prompted = build_prompt(labels, record.document, prompt_cfg)
        trace = decode_unconstrained(prompted, scorer, decode_cfg, timer)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {END_TO_END_MODES}")
    return replace(
        record,
        prediction=trace.final_summary,
        predicted_labels=trace.realized_labels,
        gold_labels=labels,
    )


def end_to_end(
    records: Sequence[CorpusRecord],
    scorer: Scorer,
    mode: str = "sentbs",
    structure_source: str = "gold",
    decode_cfg: DecodeConfig = DecodeConfig(),
    prompt_cfg: PromptConfig = PromptConfig(),
    overlap: bool = False,
    workers: int = 1,
    timer: Callable[[], float] = time.perf_counter,
) -> EvalReport:
    """Generate a summary per record with the scorer, then evaluate.

    The oracle labels for structure similarity are the selected structure
    source; realized labels from the decode trace act as the system
    sequence.  On a scorer failure the partial report of completed records
    is attached to the raised error as ``partial_report``.
    """
    if not records:
        raise EmptyCorpus("end_to_end needs at least one record")
    started = timer()
    decoded: list[CorpusRecord] = []

    def work(record: CorpusRecord) -> CorpusRecord:
        return _decode_record(
            record, scorer, mode, structure_source, decode_cfg, prompt_cfg, timer
        )

    try:
        if workers > 1:
            workers = min(workers, max(scorer.handshake().max_concurrency, 1))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                decoded = list(pool.map(work, records))
        else:
            for record in records:
                decoded.append(work(record))
    except ScorerError as err:
        complete = [r for r in decoded if r.prediction is not None]
        err.partial_report = (
            _finish_report(complete, overlap, mode, structure_source, decode_cfg, started, timer)
            if complete
            else None
        )
        raise
    return _finish_report(decoded, overlap, mode, structure_source, decode_cfg, started, timer)


def _finish_report(
    decoded: Sequence[CorpusRecord],
    overlap: bool,
    mode: str,
    structure_source: str,
    decode_cfg: DecodeConfig,
    started: float,
    timer: Callable[[], float],
) -> EvalReport:
    per_record = [_score_record(record, None, overlap) for record in decoded]
    return EvalReport(
        per_record=per_record,
        aggregate=aggregate_metrics(per_record),
        wall_clock_seconds=timer() - started,
        config={
            "version": __version__,
            "mode": mode,
            "structure_source": structure_source,
            "decode": {
                "mode": decode_cfg.mode,
                "likelihood_weight": decode_cfg.likelihood_weight,
                "max_sentences_per_segment": decode_cfg.max_sentences_per_segment,
                "stop_on_generator_eos": decode_cfg.stop_on_generator_eos,
                "gen": {
                    "num_candidates": decode_cfg.gen.num_candidates,
                    "beam_size": decode_cfg.gen.beam_size,
                    "top_p": decode_cfg.gen.top_p,
                    "min_tokens": decode_cfg.gen.min_tokens,
                    "max_tokens": decode_cfg.gen.max_tokens,
                    "length_penalty": decode_cfg.gen.length_penalty,
                    "seed": decode_cfg.gen.seed,
                },
            },
        },
    )


# -- serialization -----------------------------------------------------------

def _prf_to_json(prf: PRF) -> dict[str, float]:
    return {"p": prf.precision, "r": prf.recall, "f1": prf.f1}


def _record_to_json(metrics: RecordMetrics) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": metrics.id,
        "rouge1": _prf_to_json(metrics.rouge1),
        "rouge2": _prf_to_json(metrics.rouge2),
        "rougeL": _prf_to_json(metrics.rougeL),
        "structure_similarity": metrics.structure_similarity,
        "prediction_length_words": metrics.prediction_length_words,
    }
    if metrics.overlap is not None:
        obj["overlap"] = {
            "n1": metrics.overlap.n1,
            "n2": metrics.overlap.n2,
            "n3": metrics.overlap.n3,
        }
    return obj


def report_to_json_dict(report: EvalReport, include_timing: bool = True) -> dict[str, Any]:
    nested_aggregate: dict[str, Any] = {
        "rouge1": {},
        "rouge2": {},
        "rougeL": {},
    }
    for name, value in report.aggregate.items():
        head, _, tail = name.partition(".")
        if head in ("rouge1", "rouge2", "rougeL"):
            nested_aggregate[head][tail] = value
        elif head == "overlap":
            nested_aggregate.setdefault("overlap", {})[tail] = value
        else:
            nested_aggregate[name] = value
    out: dict[str, Any] = {
        "version": __version__,
        "config": report.config,
        "per_record": [_record_to_json(m) for m in report.per_record],
        "aggregate": nested_aggregate,
    }
    out["wall_clock_seconds"] = report.wall_clock_seconds if include_timing else 0.0
    if report.external is not None:
        out["external"] = report.external
    return out


def report_from_json_dict(obj: dict[str, Any]) -> EvalReport:
    per_record = []
    for item in obj["per_record"]:
        overlap = None
        if "overlap" in item and item["overlap"] is not None:
            overlap = OverlapRatios(**item["overlap"])
        per_record.append(
            RecordMetrics(
                id=item["id"],
                rouge1=PRF(**_prf_kwargs(item["rouge1"])),
                rouge2=PRF(**_prf_kwargs(item["rouge2"])),
                rougeL=PRF(**_prf_kwargs(item["rougeL"])),
                structure_similarity=item.get("structure_similarity"),
                prediction_length_words=item["prediction_length_words"],
                overlap=overlap,
            )
        )
    return EvalReport(
        per_record=per_record,
        aggregate=aggregate_metrics(per_record),
        wall_clock_seconds=obj.get("wall_clock_seconds", 0.0),
        config=obj.get("config", {}),
        external=obj.get("external"),
    )


def _prf_kwargs(obj: dict[str, float]) -> dict[str, float]:
    return {"precision": obj["p"], "recall": obj["r"], "f1": obj["f1"]}


CSV_COLUMNS = ("id",) + METRIC_NAMES


def report_to_csv(report: EvalReport) -> str:
    """Flatten the report to CSV: one row per record plus an aggregate row."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for metrics in report.per_record:
        row: list[str] = [metrics.id]
        for name in METRIC_NAMES:
            value = record_metric(metrics, name)
            row.append("" if value is None else repr(value))
        writer.writerow(row)
    aggregate_row = ["aggregate"]
    for name in METRIC_NAMES:
        value = report.aggregate[name]
        aggregate_row.append("" if value is None else repr(value))
    writer.writerow(aggregate_row)
    return buffer.getvalue()
