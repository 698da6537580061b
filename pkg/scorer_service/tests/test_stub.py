import pytest

from scorer_service.sentences import count_sentences, split_sentences
from scorer_service.stub import (
    BUILTIN_BANKS,
    CANONICAL_LABELS,
    StubBackend,
    StubConfig,
    load_banks,
)

PARAMS = {"num_candidates": 4}


class TestSentences:
    def test_splits_on_terminator_before_uppercase(self):
        assert count_sentences("At issue was custody. HELD: it was granted.") == 2

    def test_abbreviation_guard(self):
        assert count_sentences("Smith v. Jones was cited.") == 1

    def test_join_reconstructs(self):
        text = "One thing. Another thing. And more."
        assert "".join(split_sentences(text)) == text

    def test_empty_prefix_counts_zero(self):
        assert count_sentences("") == 0
        assert count_sentences("   ") == 0


class TestStubBackend:
    def test_deterministic_across_restarts(self):
        first = StubBackend(StubConfig(seed=11, noise=0.3))
        second = StubBackend(StubConfig(seed=11, noise=0.3))
        for prefix in ("", "At issue was the order under appeal. "):
            assert first.generate("doc", prefix, "Issue", PARAMS) == second.generate(
                "doc", prefix, "Issue", PARAMS
            )

    def test_eos_after(self):
        backend = StubBackend(StubConfig(eos_after=1))
        assert backend.generate("doc", "", None, PARAMS) != []
        assert backend.generate("doc", "One sentence here. ", None, PARAMS) == []

    def test_target_half(self):
        backend = StubBackend(StubConfig())
        candidates = backend.generate("doc", "", "Reason", PARAMS)
        assert len(candidates) == 4
        reason_bank = BUILTIN_BANKS["Reason"]
        assert all(c["text"] in reason_bank for c in candidates[:2])

    def test_label_probs_shape_and_sum(self):
        backend = StubBackend(StubConfig())
        for candidate in backend.generate("doc", "", "Issue", PARAMS):
            assert len(candidate["label_probs"]) == 4
            assert abs(sum(candidate["label_probs"]) - 1.0) < 1e-9

    def test_unknown_target_label_rejected(self):
        backend = StubBackend(StubConfig())
        with pytest.raises(ValueError):
            backend.generate("doc", "", "issue", PARAMS)

    def test_classify_bank_membership_in_canonical_order(self):
        backend = StubBackend(StubConfig())
        for position, label in enumerate(CANONICAL_LABELS):
            [vec] = backend.classify([BUILTIN_BANKS[label][0]])
            assert vec.index(max(vec)) == position
            assert max(vec) == pytest.approx(0.97)

    def test_classify_unknown_is_uniform(self):
        backend = StubBackend(StubConfig())
        assert backend.classify(["Never seen before."]) == [[0.25, 0.25, 0.25, 0.25]]

    def test_load_banks_requires_all_labels(self, tmp_path):
        bad = tmp_path / "banks.json"
        bad.write_text('{"Issue": ["One."]}')
        with pytest.raises(ValueError):
            load_banks(bad)


class TestConfigValidation:
    def test_backend_config(self):
        from scorer_service.cli import BackendConfig

        with pytest.raises(ValueError):
            BackendConfig(backend="nope")
        with pytest.raises(ValueError):
            BackendConfig(backend="transformer")
        cfg = BackendConfig(backend="transformer", model_id="m", classifier_id="c")
        assert cfg.device == "cpu"
