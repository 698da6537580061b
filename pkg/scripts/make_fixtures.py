#!/usr/bin/env python3
"""Regenerate the bundled fixtures in data/.

* ``sentence_banks.json`` — the sentence-bank fixture shared with the
  reference scorer service (one key per canonical label).
* ``synthetic20.jsonl`` — a 20-record synthetic corpus for end-to-end
  runs at mock scale.  Gold structures are 4-6 labels long so a mock
  scorer with eos_after=4 exercises both full and truncated decodes.

Deterministic: rerunning produces byte-identical files.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from structsum.core import CorpusRecord, StructureLabel, parse_label_sequence
from structsum.corpus import write_corpus
from structsum.scorers import DEFAULT_SENTENCE_BANKS, banks_to_json

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# plausible argument-role layouts; the first entry is the corpus's most
# common shape, mirroring real summary pattern skew
GOLD_PATTERNS = [
    "Issue|Conclusion|Reason|Reason",
    "Issue|Conclusion|Reason|Reason",
    "Issue|Conclusion|Reason|Reason",
    "Issue|Conclusion|Reason|Reason|Reason",
    "Issue|Conclusion|Conclusion|Reason",
    "Non_IRC|Issue|Conclusion|Reason",
    "Issue|Issue|Conclusion|Reason",
    "Issue|Conclusion|Reason|Conclusion",
    "Conclusion|Issue|Reason|Reason",
    "Non_IRC|Issue|Conclusion|Reason|Reason",
    "Issue|Conclusion|Reason|Reason",
    "Issue|Reason|Conclusion|Reason",
    "Issue|Conclusion|Conclusion|Reason|Reason",
    "Non_IRC|Non_IRC|Issue|Conclusion|Reason|Reason",
    "Issue|Conclusion|Reason|Non_IRC",
    "Conclusion|Reason|Reason|Reason",
    "Issue|Issue|Conclusion|Conclusion|Reason",
    "Issue|Conclusion|Reason|Reason",
    "Non_IRC|Issue|Reason|Conclusion",
    "Issue|Conclusion|Reason|Reason|Conclusion",
]

FILLER = [
    "The chambers judge reviewed the affidavit evidence in detail.",
    "The respondent filed a cross application seeking the same relief.",
    "A case management conference was held before the hearing.",
    "The registrar scheduled the matter for oral argument.",
    "The parties exchanged written briefs before the hearing date.",
    "The court reserved its decision at the close of argument.",
]


def main() -> None:
    DATA_DIR.mkdir(exist_ok=True)

    banks = banks_to_json(DEFAULT_SENTENCE_BANKS)
    banks_path = DATA_DIR / "sentence_banks.json"
    banks_path.write_text(json.dumps(banks, indent=2, ensure_ascii=False) + "\n", "utf-8")
    print(f"wrote {banks_path}")

    rng = random.Random(20)
    records = []
    for i, pattern in enumerate(GOLD_PATTERNS):
        gold = parse_label_sequence(pattern, "|")
        reference = " ".join(
            DEFAULT_SENTENCE_BANKS[label][(i + j) % len(DEFAULT_SENTENCE_BANKS[label])]
            for j, label in enumerate(gold)
        )
        body = []
        for label in StructureLabel:
            body.extend(DEFAULT_SENTENCE_BANKS[label])
        rng.shuffle(body)
        extra = rng.sample(FILLER, k=rng.randint(2, 4))
        document = " ".join(body[: rng.randint(8, 12)] + extra)
        records.append(
            CorpusRecord(
                id=f"case-{i + 1:04d}",
                document=document,
                reference_summary=reference,
                gold_labels=gold,
            )
        )
    corpus_path = DATA_DIR / "synthetic20.jsonl"
    write_corpus(records, corpus_path)
    print(f"wrote {corpus_path} ({len(records)} records)")


if __name__ == "__main__":
    main()
