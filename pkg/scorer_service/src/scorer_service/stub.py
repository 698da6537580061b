"""Deterministic stub backend.

Reimplements the client toolkit's mock scorer semantics from its
documented contract, without importing the client package:

* labels are Issue, Conclusion, Reason, Non_IRC in that canonical order;
* ``step`` is the number of sentences already in the summary prefix;
* generation stops (empty candidate list) once ``step >= eos_after``;
* with a target label the first ceil(k/2) candidates come from the
  target's sentence bank at template index ``(step + slot) % bank_size``
  and the rest cycle through the other labels in canonical order with the
  same index rule; without a target, slot ``i`` draws from canonical
  label ``i % 4`` at index ``(step + i // 4) % bank_size``;
* a candidate from bank L gets probabilities 0.9 at L and 0.1/3
  elsewhere, and log-likelihood ``-(0.1 * template_index) - jitter``;
* ``jitter = noise * mix64(mix64(seed + G*(step+1)) + G*(slot+1)) / 2**64``
  with G = 0x9E3779B97F4A7C15 and mix64 the splitmix64 finalizer, and is
  exactly 0.0 at noise 0;
* classification returns 0.97/0.01/0.01/0.01 for exact stripped bank
  membership and the uniform vector otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .sentences import count_sentences

CANONICAL_LABELS = ("Issue", "Conclusion", "Reason", "Non_IRC")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_HIT = 0.9
_MISS = 0.1 / 3.0
_CLASSIFY_HIT = 0.97
_CLASSIFY_MISS = 0.01
_UNIFORM = [0.25, 0.25, 0.25, 0.25]

# small built-in bank so the service runs without a fixture file
BUILTIN_BANKS: dict[str, list[str]] = {
    "Issue": ["At issue was the order under appeal."],
    "Conclusion": ["The application was granted."],
    "Reason": ["The record supported the findings."],
    "Non_IRC": ["The matter proceeded in chambers."],
}


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def load_banks(path: str | Path) -> dict[str, list[str]]:
    banks = json.loads(Path(path).read_text(encoding="utf-8"))
    for label in CANONICAL_LABELS:
        if not banks.get(label):
            raise ValueError(f"bank fixture lacks sentences for {label}")
    return {label: list(banks[label]) for label in CANONICAL_LABELS}


@dataclass
class StubConfig:
    seed: int = 0
    banks: dict[str, list[str]] = field(default_factory=lambda: dict(BUILTIN_BANKS))
    noise: float = 0.0
    eos_after: int = 4


class StubBackend:
    name = "stub"
    version = "1"
    max_concurrency = 8
    supports_inline_label_probs = True

    def __init__(self, cfg: StubConfig) -> None:
        self.cfg = cfg
        self._membership = {
            sentence: label
            for label in CANONICAL_LABELS
            for sentence in cfg.banks[label]
        }

    def ready(self) -> bool:
        return True

    def _jitter(self, step: int, slot: int) -> float:
        if self.cfg.noise == 0.0:
            return 0.0
        z = _mix64((self.cfg.seed + _GOLDEN * (step + 1)) & _MASK64)
        z = _mix64((z + _GOLDEN * (slot + 1)) & _MASK64)
        return self.cfg.noise * (z / 2.0**64)

    def _slots(self, target_label: str | None, step: int, k: int) -> list[tuple[str, int]]:
        banks = self.cfg.banks
        slots: list[tuple[str, int]] = []
        if target_label is not None:
            n_target = (k + 1) // 2
            for i in range(n_target):
                slots.append((target_label, (step + i) % len(banks[target_label])))
            others = [label for label in CANONICAL_LABELS if label != target_label]
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
        target_label: str | None,
        params: dict,
    ) -> list[dict]:
        if target_label is not None and target_label not in CANONICAL_LABELS:
            raise ValueError(f"unknown target_label {target_label!r}")
        num_candidates = params["num_candidates"]
        step = count_sentences(summary_prefix)
        if step >= self.cfg.eos_after:
            return []
        candidates = []
        for slot, (label, template_index) in enumerate(
            self._slots(target_label, step, num_candidates)
        ):
            candidates.append(
                {
                    "text": self.cfg.banks[label][template_index],
                    "log_likelihood": -(0.1 * template_index) - self._jitter(step, slot),
                    "label_probs": [
                        _HIT if other == label else _MISS for other in CANONICAL_LABELS
                    ],
                }
            )
        return candidates

    def classify(self, sentences: list[str]) -> list[list[float]]:
        out = []
        for sentence in sentences:
            label = self._membership.get(sentence.strip())
            if label is None:
                out.append(list(_UNIFORM))
            else:
                out.append(
                    [
                        _CLASSIFY_HIT if other == label else _CLASSIFY_MISS
                        for other in CANONICAL_LABELS
                    ]
                )
        return out
