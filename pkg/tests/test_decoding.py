import itertools
import math

import pytest

from structsum.core import GenerationParams, StructureLabel
from structsum.decoding import (
    DecodeConfig,
    EmptyStructure,
    NonProgress,
    combined_score,
    decode_sentbs,
    decode_unconstrained,
    forced_length_decode,
)
from structsum.scorers import (
    Candidate,
    Handshake,
    MockScorer,
    MockScorerConfig,
    ScorerError,
)
from structsum.structure import structure_similarity

I = StructureLabel.ISSUE
C = StructureLabel.CONCLUSION
R = StructureLabel.REASON
N = StructureLabel.NON_IRC


def fake_timer():
    counter = itertools.count()
    return lambda: float(next(counter))


class ScriptedScorer:
    """Serves pre-scripted candidate pools in call order, then EOS."""

    def __init__(self, pools, fail_after=None):
        self.pools = list(pools)
        self.calls = []
        self.fail_after = fail_after

    def handshake(self):
        return Handshake("scripted", "1", 1, True)

    def generate(self, document, summary_prefix, target_label, params):
        if self.fail_after is not None and len(self.calls) >= self.fail_after:
            raise ScorerError("scripted failure")
        self.calls.append((summary_prefix, target_label))
        if not self.pools:
            return []
        return list(self.pools.pop(0))

    def classify(self, sentences):
        return [(0.25, 0.25, 0.25, 0.25) for _ in sentences]


def probs_at(label, hit=0.9):
    miss = (1.0 - hit) / 3.0
    return tuple(hit if other is label else miss for other in StructureLabel)


def one_hot(label):
    return tuple(1.0 if other is label else 0.0 for other in StructureLabel)


class TestCombinedScore:
    def test_hand_arithmetic_first_candidate(self):
        candidate = Candidate("The issue is X.", -1.0, probs_at(I))
        score = combined_score(candidate, I, 0.5)
        assert score == pytest.approx(0.5 * -1.0 + 0.5 * math.log(0.9), abs=1e-12)
        assert score == pytest.approx(-0.5527, abs=5e-5)

    def test_hand_arithmetic_second_candidate(self):
        candidate = Candidate("Something else.", -0.5, (0.1, 0.3, 0.3, 0.3))
        score = combined_score(candidate, I, 0.5)
        assert score == pytest.approx(-0.25 + 0.5 * math.log(0.1), abs=1e-12)
        assert score == pytest.approx(-1.4013, abs=5e-5)

    def test_weight_one_is_likelihood_exactly(self):
        candidate = Candidate("x.", -2.25, (0.1, 0.3, 0.3, 0.3))
        assert combined_score(candidate, I, 1.0) == -2.25

    def test_zero_probability_is_floored(self):
        candidate = Candidate("x.", 0.0, one_hot(C))
        assert combined_score(candidate, I, 0.5) == pytest.approx(0.5 * math.log(1e-12))


class TestDecodeSentbs:
    def test_two_candidate_example(self):
        pool = [
            Candidate("The issue is X.", -1.0, probs_at(I)),
            Candidate("Something else.", -0.5, (0.1, 0.3, 0.3, 0.3)),
        ]
        trace = decode_sentbs("doc", (I,), ScriptedScorer([pool]), timer=fake_timer())
        assert trace.final_summary == "The issue is X."
        assert trace.realized_labels == (I,)
        assert trace.steps[0].chosen_index == 0

    def test_forced_selection_follows_structure(self):
        pools = [
            [Candidate("The issue.", -1.0, one_hot(I)), Candidate("Noise.", -0.1, one_hot(R))],
            [Candidate("Held.", -1.0, one_hot(C)), Candidate("Noise.", -0.1, one_hot(R))],
        ]
        trace = decode_sentbs("doc", (I, C), ScriptedScorer(pools), timer=fake_timer())
        assert trace.realized_labels == (I, C)
        assert structure_similarity(trace.realized_labels, (I, C)) == 1.0

    def test_empty_structure(self):
        with pytest.raises(EmptyStructure):
            decode_sentbs("doc", (), ScriptedScorer([]))

    def test_selection_optimality_invariant(self):
        scorer = MockScorer(MockScorerConfig(seed=3, noise=0.2, eos_after=6))
        trace = decode_sentbs("doc", (I, C, R, N), scorer, timer=fake_timer())
        for step in trace.steps:
            assert step.combined_scores[step.chosen_index] == max(step.combined_scores)

    def test_lambda_one_matches_unconstrained(self):
        cfg_sentbs = DecodeConfig(likelihood_weight=1.0)
        cfg_plain = DecodeConfig()
        scorer = MockScorer(MockScorerConfig(seed=5, noise=0.1, eos_after=3))
        a = decode_sentbs("doc", (I, C, R), scorer, cfg_sentbs, timer=fake_timer())
        b = decode_unconstrained("doc", scorer, cfg_plain, timer=fake_timer())
        assert a.final_summary == b.final_summary
        assert [s.chosen_index for s in a.steps] == [s.chosen_index for s in b.steps]
        assert [tuple(s.candidates) for s in a.steps] == [tuple(s.candidates) for s in b.steps]

    def test_lambda_zero_maximizes_label_probability(self):
        cfg = DecodeConfig(likelihood_weight=0.0)
        scorer = MockScorer(MockScorerConfig(seed=1, noise=0.4, eos_after=5))
        structure = (I, C, R)
        trace = decode_sentbs("doc", structure, scorer, cfg, timer=fake_timer())
        for step, target in zip(trace.steps, structure):
            best = max(c.label_probs[target.index] for c in step.candidates)
            chosen = step.candidates[step.chosen_index]
            assert chosen.label_probs[target.index] == best

    def test_raw_likelihood_sum_flag_changes_ranking(self):
        # per-token means favor the longer sentence; raw sums flip it
        pool = [
            Candidate("One two three four five six.", -0.2, probs_at(I)),
            Candidate("One two.", -0.3, probs_at(I)),
        ]
        mean_cfg = DecodeConfig(likelihood_weight=1.0)
        raw_cfg = DecodeConfig(likelihood_weight=1.0, raw_likelihood_sum=True)
        by_mean = decode_sentbs(
            "doc", (I,), ScriptedScorer([list(pool)]), mean_cfg, timer=fake_timer()
        )
        by_sum = decode_sentbs(
            "doc", (I,), ScriptedScorer([list(pool)]), raw_cfg, timer=fake_timer()
        )
        assert by_mean.steps[0].chosen_index == 0  # -0.2 beats -0.3
        assert by_sum.steps[0].chosen_index == 1  # -0.6 beats -1.2

    def test_ties_break_to_lowest_index(self):
        pool = [
            Candidate("First.", -1.0, probs_at(I)),
            Candidate("Second.", -1.0, probs_at(I)),
        ]
        trace = decode_sentbs("doc", (I,), ScriptedScorer([pool]), timer=fake_timer())
        assert trace.steps[0].chosen_index == 0

    def test_early_stop_on_eos(self):
        scorer = MockScorer(MockScorerConfig(eos_after=2))
        trace = decode_sentbs("doc", (I, C, R, N, I), scorer, timer=fake_timer())
        assert len(trace.steps) == 2
        assert len(trace.realized_labels) == 2

    def test_sentence_ctrl_step_count(self):
        scorer = MockScorer(MockScorerConfig(eos_after=10))
        structure = (I, C, R, N)
        trace = decode_sentbs("doc", structure, scorer, timer=fake_timer())
        assert len(trace.steps) == len(structure)

    def test_determinism_byte_identical_traces(self):
        cfg = DecodeConfig(gen=GenerationParams(seed=7))
        make = lambda: decode_sentbs(
            "doc",
            (I, C, R),
            MockScorer(MockScorerConfig(seed=7, noise=0.25)),
            cfg,
            timer=fake_timer(),
        )
        assert make().to_json_dict() == make().to_json_dict()

    def test_scorer_error_attaches_partial_trace(self):
        pools = [[Candidate("One.", -0.1, probs_at(I))]]
        scorer = ScriptedScorer(pools, fail_after=1)
        with pytest.raises(ScorerError) as excinfo:
            decode_sentbs("doc", (I, C), scorer, timer=fake_timer())
        partial = excinfo.value.partial_trace
        assert partial.final_summary == "One."
        assert len(partial.steps) == 1

    def test_classify_fallback_when_probs_missing(self):
        class NoInlineProbs(ScriptedScorer):
            def classify(self, sentences):
                return [one_hot(C) for _ in sentences]

        pools = [[Candidate("Held.", -0.5), Candidate("Other.", -0.9)]]
        trace = decode_sentbs("doc", (C,), NoInlineProbs(pools), timer=fake_timer())
        assert trace.realized_labels == (C,)


class TestSegmentCtrl:
    def test_decodes_against_deduped_structure(self):
        cfg = DecodeConfig(mode="segment_ctrl", max_sentences_per_segment=2)
        scorer = MockScorer(MockScorerConfig(eos_after=20))
        structure = (I, I, C)
        trace = decode_sentbs("doc", structure, scorer, cfg, timer=fake_timer())
        targets = {step.target_label for step in trace.steps}
        assert targets <= {I, C}
        assert len(trace.steps) <= 2 * cfg.max_sentences_per_segment

    def test_advances_when_realized_label_departs(self):
        pools = [
            [Candidate("Issue one.", -0.1, one_hot(I))],
            [Candidate("Held.", -0.1, one_hot(C))],  # departs from Issue segment
            [Candidate("Held again.", -0.1, one_hot(C))],
        ]
        cfg = DecodeConfig(mode="segment_ctrl", max_sentences_per_segment=4)
        trace = decode_sentbs("doc", (I, I, I, C), ScriptedScorer(pools), cfg, timer=fake_timer())
        assert trace.realized_labels == (I, C, C)
        assert [s.target_label for s in trace.steps] == [I, I, C]

    def test_segment_cap(self):
        cfg = DecodeConfig(mode="segment_ctrl", max_sentences_per_segment=2)
        pools = [[Candidate(f"Issue {i}.", -0.1, one_hot(I))] for i in range(10)]
        trace = decode_sentbs("doc", (I, I, I, I), ScriptedScorer(pools), cfg, timer=fake_timer())
        # the structure dedupes to one Issue segment, capped at 2 sentences
        assert len(trace.steps) == 2


class TestDecodeUnconstrained:
    def test_stops_at_eos(self):
        scorer = MockScorer(MockScorerConfig(eos_after=3))
        trace = decode_unconstrained("doc", scorer, timer=fake_timer())
        assert len(trace.steps) == 3

    def test_empty_first_pool(self):
        trace = decode_unconstrained("doc", ScriptedScorer([]), timer=fake_timer())
        assert trace.final_summary == ""
        assert trace.realized_labels == ()

    def test_word_budget(self):
        cfg = DecodeConfig(gen=GenerationParams(min_tokens=0, max_tokens=10))
        pools = [[Candidate("Four words per sentence.", -0.1, probs_at(N))] for _ in range(20)]
        trace = decode_unconstrained("doc", ScriptedScorer(pools), cfg, timer=fake_timer())
        assert len(trace.steps) == 3  # 4 + 4 + 4 words crosses the 10-word budget

    def test_selects_argmax_likelihood(self):
        pools = [
            [
                Candidate("Low.", -2.0, probs_at(I)),
                Candidate("High.", -0.5, probs_at(R)),
            ]
        ]
        trace = decode_unconstrained("doc", ScriptedScorer(pools), timer=fake_timer())
        assert trace.final_summary == "High."


class TestForcedLength:
    def banks(self):
        return {
            I: ("The issue is custody.",),
            C: ("The appeal was dismissed.",),
            R: ("The evidence was clear.",),
            N: ("The hearing took days.",),
        }

    def test_exact_word_count_with_truncation(self):
        scorer = MockScorer(MockScorerConfig(sentence_bank=self.banks(), eos_after=50))
        trace = forced_length_decode("doc", scorer, DecodeConfig(), exact_words=10, timer=fake_timer())
        assert len(trace.final_summary.split()) == 10
        assert len(trace.steps) == 3  # 4-word sentences: 3 requests reach 12 >= 10
        assert not trace.final_summary.endswith(".")  # truncated mid-sentence

    def test_natural_stop_length_matches_unconstrained(self):
        scorer = MockScorer(MockScorerConfig(eos_after=2))
        plain = decode_unconstrained("doc", scorer, timer=fake_timer())
        natural = len(plain.final_summary.split())
        forced = forced_length_decode(
            "doc",
            MockScorer(MockScorerConfig(eos_after=2)),
            DecodeConfig(),
            exact_words=natural,
            timer=fake_timer(),
        )
        assert forced.final_summary == plain.final_summary

    def test_non_progress(self):
        scorer = MockScorer(MockScorerConfig(sentence_bank=self.banks(), eos_after=1))
        with pytest.raises(NonProgress):
            forced_length_decode("doc", scorer, DecodeConfig(), exact_words=10, timer=fake_timer())

    def test_rejects_non_positive_target(self):
        with pytest.raises(ValueError):
            forced_length_decode("doc", ScriptedScorer([]), DecodeConfig(), exact_words=0)


class TestTraceJson:
    def test_timing_can_be_stripped(self):
        scorer = MockScorer(MockScorerConfig())
        trace = decode_sentbs("doc", (I,), scorer)
        with_timing = trace.to_json_dict()
        without = trace.to_json_dict(include_timing=False)
        assert "wall_clock_seconds" in with_timing
        assert "wall_clock_seconds" not in without
        assert "wall_clock_seconds" not in without["steps"][0]

    def test_schema_fields(self):
        scorer = MockScorer(MockScorerConfig())
        payload = decode_sentbs("doc", (I, C), scorer).to_json_dict()
        assert payload["realized_labels"] == ["Issue", "Conclusion"]
        step = payload["steps"][0]
        assert step["target_label"] == "Issue"
        assert len(step["candidates"]) == 4
        assert isinstance(step["chosen_index"], int)
