"""Structure-controlled summarization toolkit.

Builds structure prompts, runs sentence-by-sentence constrained decoding
against a pluggable scorer, and evaluates outputs with ROUGE, structure
similarity, pattern analysis, length statistics, and paired-bootstrap
significance tests.
"""

__version__ = "0.1.0"

from .core import (
    CANONICAL_LABELS,
    CorpusRecord,
    EmptyCorpus,
    GenerationParams,
    IdMismatch,
    LabelSequence,
    StructsumError,
    StructureLabel,
    UnknownLabel,
    join_labels,
    parse_label,
    parse_label_sequence,
)
from .structure import (
    PatternDistribution,
    corpus_similarity,
    dedupe_segments,
    levenshtein,
    normalize_pattern,
    pattern_distribution,
    structure_similarity,
)
from .textmetrics import PRF, length_stats, ngram_overlap, rouge_l, rouge_n, tokenize
from .corpus import (
    load_corpus,
    read_corpus,
    silver_label,
    split_sentences,
    write_corpus,
)
from .prompting import PromptConfig, build_prompt, parse_prompt, prompt_for_record
from .scorers import (
    Candidate,
    Handshake,
    HttpScorer,
    MockScorer,
    MockScorerConfig,
    ScorerError,
)
from .decoding import (
    DecodeConfig,
    DecodeTrace,
    combined_score,
    decode_sentbs,
    decode_unconstrained,
    forced_length_decode,
)
from .bootstrap import (
    BootstrapResult,
    PairedSamples,
    compare_reports,
    paired_bootstrap,
)
from .evaluation import (
    EvalReport,
    end_to_end,
    evaluate_records,
    report_from_json_dict,
    report_to_csv,
    report_to_json_dict,
    structure_upper_bound,
)
