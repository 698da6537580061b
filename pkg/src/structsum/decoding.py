"""Sentence-by-sentence structure-controlled decoding.

For each target label the decoder requests a pool of candidate next
sentences from the scorer, scores every candidate as a weighted sum of its
length-normalized log-likelihood and the log-probability of the target
label, and appends the argmax.  The weight ``likelihood_weight`` is the
mixing knob: 1.0 degenerates to likelihood-only selection (identical to
unconstrained decoding, so the target label is not even forwarded to the
scorer), 0.0 selects purely on label probability.

Two control granularities exist: sentence_ctrl consumes exactly one target
label per generated sentence; segment_ctrl first collapses adjacent
duplicate labels and may emit several sentences per collapsed span,
advancing to the next span when the selected sentence's most probable
label departs from the span's label or the per-span cap is reached.

Traces record wall-clock per step and in total; pass a fake ``timer`` for
fully reproducible traces.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

from .core import (
    CANONICAL_LABELS,
    GenerationParams,
    LabelSequence,
    StructsumError,
    StructureLabel,
)
from .scorers import Candidate, Scorer, ScorerError
from .structure import dedupe_segments
from .textmetrics import tokenize

LOG_PROB_FLOOR = 1e-12


class EmptyStructure(StructsumError):
    """A structure-controlled decode needs at least one target label."""


class NonProgress(StructsumError):
    """The scorer stopped producing candidates before the length target."""


@dataclass(frozen=True)
class DecodeConfig:
    mode: Literal["sentence_ctrl", "segment_ctrl"] = "sentence_ctrl"
    likelihood_weight: float = 0.5
    gen: GenerationParams = field(default_factory=GenerationParams)
    max_sentences_per_segment: int = 4
    stop_on_generator_eos: bool = True
    # score on the raw summed log-likelihood (mean * token count) instead
    # of the scorer's per-token mean
    raw_likelihood_sum: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.likelihood_weight <= 1.0:
            raise ValueError("likelihood_weight must be in [0, 1]")
        if self.max_sentences_per_segment < 1:
            raise ValueError("max_sentences_per_segment must be positive")


@dataclass
class DecodeStep:
    target_label: StructureLabel | None
    candidates: tuple[Candidate, ...]
    chosen_index: int
    combined_scores: tuple[float, ...]
    wall_clock_seconds: float = 0.0


@dataclass
class DecodeTrace:
    steps: list[DecodeStep]
    final_summary: str
    realized_labels: LabelSequence
    wall_clock_seconds: float = 0.0

    def to_json_dict(self, include_timing: bool = True) -> dict[str, Any]:
        steps = []
        for step in self.steps:
            obj: dict[str, Any] = {
                "target_label": None
                if step.target_label is None
                else step.target_label.value,
                "candidates": [
                    {
                        "text": c.text,
                        "log_likelihood": c.log_likelihood,
                        "label_probs": None
                        if c.label_probs is None
                        else list(c.label_probs),
                    }
                    for c in step.candidates
                ],
                "chosen_index": step.chosen_index,
                "combined_scores": list(step.combined_scores),
            }
            if include_timing:
                obj["wall_clock_seconds"] = step.wall_clock_seconds
            steps.append(obj)
        out: dict[str, Any] = {
            "steps": steps,
            "final_summary": self.final_summary,
            "realized_labels": [label.value for label in self.realized_labels],
        }
        if include_timing:
            out["wall_clock_seconds"] = self.wall_clock_seconds
        return out


def combined_score(
    candidate: Candidate, target: StructureLabel, likelihood_weight: float
) -> float:
    """Weighted mix of log-likelihood and log target-label probability."""
    if candidate.label_probs is None:
        raise ValueError("candidate has no label probabilities")
    label_term = math.log(max(candidate.label_probs[target.index], LOG_PROB_FLOOR))
    return (
        likelihood_weight * candidate.log_likelihood
        + (1.0 - likelihood_weight) * label_term
    )


def _argmax(values: Sequence[float]) -> int:
    return values.index(max(values))


def _realized_label(candidate: Candidate) -> StructureLabel:
    assert candidate.label_probs is not None
    probs = candidate.label_probs
    return CANONICAL_LABELS[probs.index(max(probs))]


def _likelihood(candidate: Candidate, cfg: DecodeConfig) -> float:
    if cfg.raw_likelihood_sum:
        return candidate.log_likelihood * max(len(tokenize(candidate.text)), 1)
    return candidate.log_likelihood


class _Session:
    """Shared plumbing for one decode run."""

    def __init__(self, scorer: Scorer, cfg: DecodeConfig, timer: Callable[[], float]):
        self.scorer = scorer
        self.cfg = cfg
        self.timer = timer
        self.steps: list[DecodeStep] = []
        self.realized: list[StructureLabel] = []
        self.prefix = ""
        self.started = timer()

    def fetch(self, document: str, target: StructureLabel | None) -> list[Candidate]:
        candidates = self.scorer.generate(
            document, self.prefix, target, self.cfg.gen
        )
        if any(c.label_probs is None for c in candidates):
            probs = self.scorer.classify([c.text for c in candidates])
            candidates = [
                Candidate(c.text, c.log_likelihood, tuple(vec))
                for c, vec in zip(candidates, probs)
            ]
        return candidates

    def select(
        self,
        candidates: Sequence[Candidate],
        target: StructureLabel | None,
        step_started: float,
    ) -> Candidate:
        cfg = self.cfg
        if target is None or cfg.likelihood_weight == 1.0:
            scores = tuple(_likelihood(c, cfg) for c in candidates)
        elif cfg.raw_likelihood_sum:
            scores = tuple(
                combined_score(
                    Candidate(c.text, _likelihood(c, cfg), c.label_probs),
                    target,
                    cfg.likelihood_weight,
                )
                for c in candidates
            )
        else:
            scores = tuple(
                combined_score(c, target, cfg.likelihood_weight) for c in candidates
            )
        chosen_index = _argmax(scores)
        chosen = candidates[chosen_index]
        assert scores[chosen_index] == max(scores)
        self.steps.append(
            DecodeStep(
                target_label=target,
                candidates=tuple(candidates),
                chosen_index=chosen_index,
                combined_scores=scores,
                wall_clock_seconds=self.timer() - step_started,
            )
        )
        self.realized.append(_realized_label(chosen))
        self.prefix += chosen.text + " "
        return chosen

    def trace(self) -> DecodeTrace:
        return DecodeTrace(
            steps=self.steps,
            final_summary=self.prefix.rstrip(),
            realized_labels=tuple(self.realized),
            wall_clock_seconds=self.timer() - self.started,
        )


def _attach_partial(err: ScorerError, session: _Session) -> ScorerError:
    err.partial_trace = session.trace()
    return err


def decode_sentbs(
    document: str,
    structure: Sequence[StructureLabel],
    scorer: Scorer,
    cfg: DecodeConfig = DecodeConfig(),
    timer: Callable[[], float] = time.perf_counter,
) -> DecodeTrace:
    """Decode a summary that follows ``structure`` label by label.

    In sentence_ctrl mode each label yields one sentence; in segment_ctrl
    mode the structure is first collapsed to non-repeating spans and each
    span may yield up to ``max_sentences_per_segment`` sentences.  An empty
    candidate pool ends the decode when ``stop_on_generator_eos`` is set,
    otherwise the decoder skips to the next target.
    """
    structure = tuple(structure)
    if not structure:
        raise EmptyStructure("structure must contain at least one label")
    targets = dedupe_segments(structure) if cfg.mode == "segment_ctrl" else structure
    per_target = cfg.max_sentences_per_segment if cfg.mode == "segment_ctrl" else 1
    session = _Session(scorer, cfg, timer)
    # at full likelihood weight the label term is ignored, so run the
    # scorer exactly as unconstrained decoding would
    forward_target = cfg.likelihood_weight < 1.0
    try:
        for target in targets:
            for _ in range(per_target):
                step_started = timer()
                candidates = session.fetch(document, target if forward_target else None)
                if not candidates:
                    if cfg.stop_on_generator_eos:
                        return session.trace()
                    break
                chosen = session.select(candidates, target, step_started)
                if cfg.mode == "segment_ctrl" and _realized_label(chosen) is not target:
                    break
    except ScorerError as err:
        raise _attach_partial(err, session)
    return session.trace()


def decode_unconstrained(
    document: str,
    scorer: Scorer,
    cfg: DecodeConfig = DecodeConfig(),
    timer: Callable[[], float] = time.perf_counter,
) -> DecodeTrace:
    """Likelihood-only decoding: no target labels, argmax log-likelihood.

    Stops on an empty candidate pool or once the summary reaches
    ``cfg.gen.max_tokens`` words (word count as token proxy).
    """
    session = _Session(scorer, cfg, timer)
    total_words = 0
    try:
        while total_words < cfg.gen.max_tokens:
            step_started = timer()
            candidates = session.fetch(document, None)
            if not candidates:
                break
            chosen = session.select(candidates, None, step_started)
            total_words += len(chosen.text.split())
    except ScorerError as err:
        raise _attach_partial(err, session)
    return session.trace()


def forced_length_decode(
    document: str,
    scorer: Scorer,
    cfg: DecodeConfig,
    exact_words: int,
    timer: Callable[[], float] = time.perf_counter,
) -> DecodeTrace:
    """Keep generating past end-of-sequence until ``exact_words`` words.

    The final sentence is truncated mid-sentence if needed so the summary
    has exactly the requested word count.  A scorer that stops producing
    candidates before the target raises :class:`NonProgress`.
    """
    if exact_words < 1:
        raise ValueError("exact_words must be positive")
    session = _Session(scorer, cfg, timer)
    total_words = 0
    try:
        while total_words < exact_words:
            step_started = timer()
            candidates = session.fetch(document, None)
            if not candidates:
                raise NonProgress(
                    f"scorer stopped at {total_words} of {exact_words} words"
                )
            chosen = session.select(candidates, None, step_started)
            total_words += len(chosen.text.split())
    except ScorerError as err:
        raise _attach_partial(err, session)
    trace = session.trace()
    words = trace.final_summary.split()
    trace.final_summary = " ".join(words[:exact_words])
    return trace
