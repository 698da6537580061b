"""Scorer backends: the wire-protocol HTTP client and the deterministic
in-process mock.

A scorer is anything that can generate candidate continuation sentences
and classify sentences into the four structure labels::

    handshake() -> Handshake
    generate(document, summary_prefix, target_label, params) -> [Candidate]
    classify(sentences) -> [[p_issue, p_conclusion, p_reason, p_non_irc]]

An empty candidate list from ``generate`` means end-of-sequence.

Wire protocol (JSON over HTTP, UTF-8 bodies):

* ``GET /v1/handshake`` -> ``{"name", "version", "max_concurrency",
  "supports_inline_label_probs"}``
* ``POST /v1/generate`` with ``{"document", "summary_prefix",
  "target_label" (canonical string or null), "params"}`` ->
  ``{"candidates": [{"text", "log_likelihood", "label_probs" (4 floats or
  null)}]}``
* ``POST /v1/classify`` with ``{"sentences": [...]}`` ->
  ``{"probs": [[...], ...]}`` in canonical label order
* errors are 4xx/5xx with ``{"error": str}``

Mock generation semantics (the reference stub service reimplements these
independently for cross-implementation protocol tests):

* ``step`` = number of sentences already in ``summary_prefix`` per the
  toolkit sentence splitter; ``generate`` returns no candidates once
  ``step >= eos_after``.
* With a target label, the first ceil(k/2) of k candidates come from the
  target's bank with template index ``(step + slot) % bank_size``; the
  remaining slots cycle through the other labels in canonical order with
  the same index rule.  Without a target, slot ``i`` draws from canonical
  label ``i % 4`` with template index ``(step + i // 4) % bank_size``.
* A candidate drawn from bank L has label probabilities 0.9 at L and
  0.1/3 elsewhere, and log-likelihood ``-(0.1 * template_index) - jitter``.
* ``jitter = noise * u`` with
  ``u = mix64(mix64((seed + GOLDEN*(step+1)) mod 2^64) + GOLDEN*(slot+1) mod 2^64) / 2^64``
  where GOLDEN = 0x9E3779B97F4A7C15 and mix64 is the splitmix64 finalizer;
  jitter is exactly 0.0 when ``noise == 0``.
* ``classify`` returns 0.97/0.01/0.01/0.01 for exact (whitespace-stripped)
  bank membership, else the uniform vector.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol

import requests

from .core import (
    CANONICAL_LABELS,
    GenerationParams,
    StructsumError,
    StructureLabel,
    parse_label,
)
from .corpus import split_sentences


class ScorerError(StructsumError):
    """Base class for scorer transport and protocol failures."""


class Unreachable(ScorerError):
    pass


class ScorerTimeout(ScorerError):
    pass


class ProtocolError(ScorerError):
    def __init__(self, status: int | None, detail: str) -> None:
        self.status = status
        self.detail = detail
        prefix = f"HTTP {status}: " if status is not None else ""
        super().__init__(f"{prefix}{detail}")


@dataclass(frozen=True)
class Candidate:
    """A generated sentence with its selection inputs.

    ``log_likelihood`` is the length-normalized per-token mean
    log-probability.  ``label_probs`` is in canonical label order and may
    be None for scorers that leave classification to a separate call.
    """

    text: str
    log_likelihood: float
    label_probs: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.label_probs is not None:
            if len(self.label_probs) != len(CANONICAL_LABELS):
                raise ValueError("label_probs must have four entries")
            if any(p < 0.0 for p in self.label_probs):
                raise ValueError("label_probs entries must be non-negative")
            if abs(sum(self.label_probs) - 1.0) > 1e-6:
                raise ValueError("label_probs must sum to 1 within 1e-6")


@dataclass(frozen=True)
class Handshake:
    name: str
    version: str
    max_concurrency: int
    supports_inline_label_probs: bool


class Scorer(Protocol):
    def handshake(self) -> Handshake: ...

    def generate(
        self,
        document: str,
        summary_prefix: str,
        target_label: StructureLabel | None,
        params: GenerationParams,
    ) -> list[Candidate]: ...

    def classify(self, sentences: Sequence[str]) -> list[tuple[float, ...]]: ...


# -- wire format helpers ----------------------------------------------------

def params_to_wire(params: GenerationParams) -> dict[str, Any]:
    return {
        "num_candidates": params.num_candidates,
        "beam_size": params.beam_size,
        "top_p": params.top_p,
        "min_tokens": params.min_tokens,
        "max_tokens": params.max_tokens,
        "length_penalty": params.length_penalty,
        "seed": params.seed,
    }


def candidate_to_wire(candidate: Candidate) -> dict[str, Any]:
    return {
        "text": candidate.text,
        "log_likelihood": candidate.log_likelihood,
        "label_probs": None
        if candidate.label_probs is None
        else list(candidate.label_probs),
    }


def candidate_from_wire(obj: dict[str, Any]) -> Candidate:
    try:
        text = obj["text"]
        log_likelihood = obj["log_likelihood"]
        probs = obj.get("label_probs")
    except (TypeError, KeyError) as err:
        raise ProtocolError(None, f"malformed candidate: {err!r}") from None
    if not isinstance(text, str) or not isinstance(log_likelihood, (int, float)):
        raise ProtocolError(None, "malformed candidate field types")
    label_probs = None
    if probs is not None:
        if not isinstance(probs, list) or len(probs) != 4:
            raise ProtocolError(None, "label_probs must be a list of four floats")
        label_probs = tuple(float(p) for p in probs)
    try:
        return Candidate(text=text, log_likelihood=float(log_likelihood), label_probs=label_probs)
    except ValueError as err:
        raise ProtocolError(None, str(err)) from None


# -- deterministic mock ------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


DEFAULT_SENTENCE_BANKS: dict[StructureLabel, tuple[str, ...]] = {
    StructureLabel.ISSUE: (
        "At issue was the interim custody of the child.",
        "The issue concerned the interpretation of the limitation statute.",
        "At issue was whether the deficiency judgment could include solicitor costs.",
        "The question was whether the trial judge erred in weighing the evidence.",
    ),
    StructureLabel.CONCLUSION: (
        "The court granted the application for interim custody.",
        "The appeal was dismissed with costs to the respondent.",
        "The plaintiff was granted judgment for the deficiency with interest.",
        "The court ordered both parents to complete a parenting course.",
    ),
    StructureLabel.REASON: (
        "The evidence amply supported the findings of the trial judge.",
        "The statutory language admitted only one reasonable reading.",
        "An interim application must give significant weight to the status quo.",
        "The charges were recoverable under the express terms of the mortgage.",
    ),
    StructureLabel.NON_IRC: (
        "The parties began cohabitating in May 1998 and separated in April 2000.",
        "The property sold for 156000 dollars pursuant to a judicial sale.",
        "The hearing proceeded in chambers over two days.",
        "Counsel for both sides filed written submissions.",
    ),
}

_BANK_PROB_HIT = 0.9
_BANK_PROB_MISS = 0.1 / 3.0
_CLASSIFY_HIT = 0.97
_CLASSIFY_MISS = 0.01
_UNIFORM = tuple(1.0 / len(CANONICAL_LABELS) for _ in CANONICAL_LABELS)


@dataclass(frozen=True)
class MockScorerConfig:
    seed: int = 0
    sentence_bank: dict[StructureLabel, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_SENTENCE_BANKS)
    )
    noise: float = 0.0
    eos_after: int = 4

    def __post_init__(self) -> None:
        if self.noise < 0.0:
            raise ValueError("noise must be non-negative")
        if self.eos_after < 1:
            raise ValueError("eos_after must be positive")
        for label in CANONICAL_LABELS:
            bank = self.sentence_bank.get(label)
            if not bank:
                raise ValueError(f"sentence bank for {label} must be non-empty")
            for template in bank:
                if len(split_sentences(template)) != 1:
                    raise ValueError(
                        f"bank template must be a single sentence: {template!r}"
                    )


def banks_from_json(obj: dict[str, list[str]]) -> dict[StructureLabel, tuple[str, ...]]:
    """Parse a sentence-bank fixture: canonical label string -> sentences."""
    return {parse_label(key): tuple(values) for key, values in obj.items()}


def banks_to_json(banks: dict[StructureLabel, tuple[str, ...]]) -> dict[str, list[str]]:
    return {label.value: list(banks[label]) for label in CANONICAL_LABELS}


def _label_probs_for(label: StructureLabel) -> tuple[float, float, float, float]:
    return tuple(
        _BANK_PROB_HIT if other is label else _BANK_PROB_MISS
        for other in CANONICAL_LABELS
    )


class MockScorer:
    """Deterministic template scorer; see the module docstring for semantics."""

    def __init__(self, cfg: MockScorerConfig = MockScorerConfig()) -> None:
        self.cfg = cfg
        self._membership = {
            template: label
            for label in CANONICAL_LABELS
            for template in cfg.sentence_bank[label]
        }

    def handshake(self) -> Handshake:
        return Handshake(
            name="mock",
            version="1",
            max_concurrency=16,
            supports_inline_label_probs=True,
        )

    def _jitter(self, step: int, slot: int) -> float:
        if self.cfg.noise == 0.0:
            return 0.0
        z = _mix64((self.cfg.seed + _GOLDEN * (step + 1)) & _MASK64)
        z = _mix64((z + _GOLDEN * (slot + 1)) & _MASK64)
        return self.cfg.noise * (z / 2.0**64)

    def _slots(
        self, target_label: StructureLabel | None, step: int, k: int
    ) -> list[tuple[StructureLabel, int]]:
        banks = self.cfg.sentence_bank
        slots: list[tuple[StructureLabel, int]] = []
        if target_label is not None:
            n_target = (k + 1) // 2
            for i in range(n_target):
                slots.append((target_label, (step + i) % len(banks[target_label])))
            others = [label for label in CANONICAL_LABELS if label is not target_label]
            for j in range(k - n_target):
                label = others[j % len(others)]
                slots.append((label, (step + j) % len(banks[label])))
        else:
            for i in range(k):
                label = CANONICAL_LABELS[i % len(CANONICAL_LABELS)]
                slots.append((label, (step + i // len(CANONICAL_LABELS)) % len(banks[label])))
        return slots

    def generate(
        self,
        document: str,
        summary_prefix: str,
        target_label: StructureLabel | None,
        params: GenerationParams,
    ) -> list[Candidate]:
        step = len(split_sentences(summary_prefix.strip()))
        if step >= self.cfg.eos_after:
            return []
        candidates = []
        for slot, (label, template_index) in enumerate(
            self._slots(target_label, step, params.num_candidates)
        ):
            candidates.append(
                Candidate(
                    text=self.cfg.sentence_bank[label][template_index],
                    log_likelihood=-(0.1 * template_index) - self._jitter(step, slot),
                    label_probs=_label_probs_for(label),
                )
            )
        return candidates

    def classify(self, sentences: Sequence[str]) -> list[tuple[float, ...]]:
        out = []
        for sentence in sentences:
            label = self._membership.get(sentence.strip())
            if label is None:
                out.append(_UNIFORM)
            else:
                out.append(
                    tuple(
                        _CLASSIFY_HIT if other is label else _CLASSIFY_MISS
                        for other in CANONICAL_LABELS
                    )
                )
        return out


# -- HTTP client -------------------------------------------------------------

_BACKOFF_INITIAL_SECONDS = 0.2


class HttpScorer:
    """Wire-protocol client with retry and exponential backoff.

    Transport failures and 5xx responses are retried up to ``retries``
    times with backoff starting at 200 ms; 4xx responses surface
    immediately as :class:`ProtocolError`.
    """

    def __init__(self, endpoint: str, timeout_ms: int = 10_000, retries: int = 2) -> None:
        if not endpoint.startswith(("http://", "https://")):
            raise ValueError(f"endpoint must be an http(s) URL: {endpoint!r}")
        self.endpoint = endpoint.rstrip("/")
        self.timeout_seconds = timeout_ms / 1000.0
        self.retries = retries

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        url = f"{self.endpoint}{path}"
        last_error: ScorerError | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(_BACKOFF_INITIAL_SECONDS * 2 ** (attempt - 1))
            try:
                response = requests.request(
                    method, url, json=body, timeout=self.timeout_seconds
                )
            except requests.Timeout:
                last_error = ScorerTimeout(f"{method} {url} timed out")
                continue
            except requests.ConnectionError as err:
                last_error = Unreachable(f"{method} {url}: {err}")
                continue
            if response.status_code >= 500:
                last_error = ProtocolError(response.status_code, response.text[:200])
                continue
            if response.status_code >= 400:
                raise ProtocolError(response.status_code, response.text[:200])
            try:
                payload = response.json()
            except ValueError:
                raise ProtocolError(response.status_code, "response body is not JSON")
            if not isinstance(payload, dict):
                raise ProtocolError(response.status_code, "response is not a JSON object")
            return payload
        assert last_error is not None
        raise last_error

    def handshake(self) -> Handshake:
        payload = self._request("GET", "/v1/handshake")
        try:
            return Handshake(
                name=str(payload["name"]),
                version=str(payload["version"]),
                max_concurrency=int(payload["max_concurrency"]),
                supports_inline_label_probs=bool(payload["supports_inline_label_probs"]),
            )
        except KeyError as err:
            raise ProtocolError(None, f"handshake missing field {err}") from None

    def generate(
        self,
        document: str,
        summary_prefix: str,
        target_label: StructureLabel | None,
        params: GenerationParams,
    ) -> list[Candidate]:
        payload = self._request(
            "POST",
            "/v1/generate",
            {
                "document": document,
                "summary_prefix": summary_prefix,
                "target_label": None if target_label is None else target_label.value,
                "params": params_to_wire(params),
            },
        )
        candidates = payload.get("candidates")
        if not isinstance(candidates, list):
            raise ProtocolError(None, "generate response lacks a candidates list")
        if len(candidates) > params.num_candidates:
            raise ProtocolError(
                None, f"server returned {len(candidates)} > {params.num_candidates} candidates"
            )
        return [candidate_from_wire(obj) for obj in candidates]

    def classify(self, sentences: Sequence[str]) -> list[tuple[float, ...]]:
        payload = self._request("POST", "/v1/classify", {"sentences": list(sentences)})
        probs = payload.get("probs")
        if not isinstance(probs, list) or len(probs) != len(sentences):
            raise ProtocolError(None, "classify response shape mismatch")
        out = []
        for vec in probs:
            if not isinstance(vec, list) or len(vec) != len(CANONICAL_LABELS):
                raise ProtocolError(None, "classify vectors must have four entries")
            out.append(tuple(float(p) for p in vec))
        return out
