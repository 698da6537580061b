"""Rule-based sentence splitting, matching the client toolkit's rules.

A sentence ends after '.', '?' or '!' followed by whitespace and an
uppercase letter, unless the terminator closes a known abbreviation
("v.", "e.g.", honorifics, ...) or a single capital initial like "R.".
Kept dependency-free and reimplemented here on purpose: the stub must
reproduce the client's step counting without sharing code with it.
"""

from __future__ import annotations

import re

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
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : end + 1]
    while token and not token[0].isalpha():
        token = token[1:]
    if not token:
        return False
    if token.lower() in ABBREVIATIONS:
        return True
    return _SINGLE_INITIAL.fullmatch(token) is not None


def split_sentences(text: str) -> list[str]:
    """Split into sentences; each keeps its trailing whitespace."""
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


def count_sentences(text: str) -> int:
    stripped = text.strip()
    return len(split_sentences(stripped)) if stripped else 0
