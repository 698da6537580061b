"""Best-effort transformer backend.

Wraps a locally available encoder-decoder summarizer (e.g. an LED
checkpoint) and a four-way sentence classifier.  Generation is
sentence-bounded: the model generates up to the requested token budget and
the continuation is cut at the first sentence terminator, which
approximates per-sentence decoding without touching model internals.

Models load in a background thread; the service answers 503 until both
are ready.  This backend is excluded from CI on purpose: it needs model
weights on disk.
"""

from __future__ import annotations

import math
import threading

from .sentences import split_sentences
from .stub import CANONICAL_LABELS


class TransformerBackend:
    name = "transformer"
    version = "1"
    max_concurrency = 1  # GPU calls are serialized
    supports_inline_label_probs = False

    def __init__(self, model_id: str, classifier_id: str, device: str = "cpu") -> None:
        self.model_id = model_id
        self.classifier_id = classifier_id
        self.device = device
        self._lock = threading.Lock()
        self._ready = False
        self._error: Exception | None = None
        threading.Thread(target=self._load, daemon=True).start()

    def _load(self) -> None:
        try:
            import torch
            from transformers import (
                AutoModelForSeq2SeqLM,
                AutoModelForSequenceClassification,
                AutoTokenizer,
            )

            self._torch = torch
            self._tokenizer = AutoTokenizer.from_pretrained(self.model_id)
            self._model = AutoModelForSeq2SeqLM.from_pretrained(self.model_id).to(self.device)
            self._model.eval()
            self._cls_tokenizer = AutoTokenizer.from_pretrained(self.classifier_id)
            self._cls_model = AutoModelForSequenceClassification.from_pretrained(
                self.classifier_id
            ).to(self.device)
            self._cls_model.eval()
            self._label_order = self._resolve_label_order()
            self._ready = True
        except Exception as err:  # surfaced as 503 detail
            self._error = err

    def _resolve_label_order(self) -> list[int]:
        """Map classifier output positions onto the canonical label order."""
        id2label = getattr(self._cls_model.config, "id2label", None) or {}
        by_name = {str(v): int(k) for k, v in id2label.items()}
        if all(label in by_name for label in CANONICAL_LABELS):
            return [by_name[label] for label in CANONICAL_LABELS]
        return list(range(len(CANONICAL_LABELS)))

    def ready(self) -> bool:
        if self._error is not None:
            raise RuntimeError(f"model load failed: {self._error}")
        return self._ready

    def generate(
        self,
        document: str,
        summary_prefix: str,
        target_label: str | None,
        params: dict,
    ) -> list[dict]:
        torch = self._torch
        num_candidates = params["num_candidates"]
        prompt = document
        if target_label is not None:
            prompt = f"{target_label} ==> {document}"
        with self._lock, torch.no_grad():
            torch.manual_seed(params.get("seed", 0))
            inputs = self._tokenizer(
                prompt, return_tensors="pt", truncation=True, max_length=6144
            ).to(self.device)
            prefix_ids = None
            if summary_prefix:
                prefix_ids = self._tokenizer(
                    summary_prefix, return_tensors="pt", add_special_tokens=False
                ).input_ids.to(self.device)
            kwargs = dict(
                num_beams=params.get("beam_size", 2),
                do_sample=True,
                top_p=params.get("top_p", 0.9),
                num_return_sequences=num_candidates,
                max_new_tokens=params.get("max_tokens", 256),
                min_new_tokens=params.get("min_tokens", 0),
                length_penalty=params.get("length_penalty", 1.0),
                output_scores=True,
                return_dict_in_generate=True,
            )
            if prefix_ids is not None:
                kwargs["decoder_input_ids"] = prefix_ids.repeat(1, 1)
            output = self._model.generate(**inputs, **kwargs)
        candidates = []
        scores = getattr(output, "sequences_scores", None)
        for i, sequence in enumerate(output.sequences):
            text = self._tokenizer.decode(sequence, skip_special_tokens=True)
            if summary_prefix and text.startswith(summary_prefix):
                text = text[len(summary_prefix):]
            sentences = split_sentences(text.strip())
            if not sentences:
                continue
            first = sentences[0].strip()
            score = float(scores[i]) if scores is not None else -math.inf
            candidates.append(
                {"text": first, "log_likelihood": score, "label_probs": None}
            )
        return candidates[:num_candidates]

    def classify(self, sentences: list[str]) -> list[list[float]]:
        torch = self._torch
        with self._lock, torch.no_grad():
            batch = self._cls_tokenizer(
                list(sentences), return_tensors="pt", padding=True, truncation=True
            ).to(self.device)
            logits = self._cls_model(**batch).logits
            probs = torch.softmax(logits, dim=-1).cpu().tolist()
        return [[row[k] for k in self._label_order] for row in probs]
