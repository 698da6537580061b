"""Command-line interface.

Subcommands: evaluate, analyze, prompt, decode, label, compare, run.
Exit codes: 0 success, 1 significant difference under
``compare --fail-on-significant``, 2 any error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bootstrap import compare_reports
from .core import (
    GenerationParams,
    StructsumError,
    parse_label_sequence,
)
from .corpus import load_corpus, silver_label, write_corpus
from .decoding import DecodeConfig, decode_sentbs
from .evaluation import (
    END_TO_END_MODES,
    end_to_end,
    evaluate_records,
    merge_predictions,
    report_from_json_dict,
    report_to_csv,
    report_to_json_dict,
    structure_upper_bound,
)
from .prompting import PromptConfig, build_prompt
from .scorers import HttpScorer, MockScorer, MockScorerConfig, banks_from_json
from .structure import pattern_distribution


def _write_json(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _make_scorer(spec: str, seed: int, banks_path: str | None, eos_after: int, noise: float):
    if spec == "mock":
        banks = None
        if banks_path:
            banks = banks_from_json(json.loads(Path(banks_path).read_text(encoding="utf-8")))
        cfg = (
            MockScorerConfig(seed=seed, sentence_bank=banks, noise=noise, eos_after=eos_after)
            if banks is not None
            else MockScorerConfig(seed=seed, noise=noise, eos_after=eos_after)
        )
        return MockScorer(cfg)
    if spec.startswith(("http://", "https://")):
        return HttpScorer(spec)
    raise StructsumError(f"scorer must be 'mock' or an http(s) URL, got {spec!r}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="deterministic seed")
    parser.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="record-level parallelism (default: logical cores)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress chatter")
    parser.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="report output format",
    )


def _add_scorer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--banks",
        default=None,
        help="sentence-bank JSON fixture for the mock scorer",
    )
    parser.add_argument(
        "--eos-after",
        type=int,
        default=4,
        help="mock scorer: end-of-sequence after this many sentences",
    )
    parser.add_argument(
        "--noise",
        type=float,
        default=0.0,
        help="mock scorer: log-likelihood jitter amplitude",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structsum",
        description="Structure-controlled summarization toolkit",
    )
    parser.add_argument("--version", action="version", version=f"structsum {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p_eval = commands.add_parser("evaluate", help="score predictions against references")
    p_eval.add_argument("--references", required=True, help="corpus JSONL with references")
    p_eval.add_argument(
        "--predictions",
        default=None,
        help="optional JSONL of {id, prediction}; otherwise the corpus 'prediction' field is used",
    )
    p_eval.add_argument("--classifier", default=None, help="'mock' or scorer URL for on-demand labels")
    p_eval.add_argument("--overlap", action="store_true", help="also compute 1/2/3-gram source overlap")
    p_eval.add_argument("--out", default=None, help="report file (default: stdout)")
    p_eval.add_argument("--no-timing", action="store_true", help="zero wall-clock fields for reproducible bytes")
    _add_scorer_flags(p_eval)
    _add_common(p_eval)

    p_analyze = commands.add_parser("analyze", help="normalized structure pattern distribution")
    p_analyze.add_argument("--corpus", required=True)
    p_analyze.add_argument("--labels", choices=("gold", "predicted"), default="gold")
    p_analyze.add_argument("--top", type=int, default=10, help="rows in the printed table")
    p_analyze.add_argument("--out", default=None, help="distribution JSON file (default: stdout)")
    p_analyze.add_argument("--upper-bound", action="store_true",
                           help="also report the classifier similarity ceiling (needs --classifier)")
    p_analyze.add_argument("--classifier", default=None)
    _add_scorer_flags(p_analyze)
    _add_common(p_analyze)

    p_prompt = commands.add_parser("prompt", help="structure prompt tools")
    prompt_commands = p_prompt.add_subparsers(dest="prompt_command", required=True)
    p_build = prompt_commands.add_parser("build", help="emit a structure prompt to stdout")
    p_build.add_argument("--labels", required=True, help='label sequence, e.g. "Issue|Conclusion"')
    p_build.add_argument("--input", required=True, help="document text file")
    p_build.add_argument("--marker", default="==>")
    p_build.add_argument("--sep", default=" | ")
    _add_common(p_build)

    p_decode = commands.add_parser("decode", help="constrained decoding")
    decode_commands = p_decode.add_subparsers(dest="decode_command", required=True)
    p_sentbs = decode_commands.add_parser("sentbs", help="sentence-by-sentence structure decode")
    p_sentbs.add_argument("--structure", required=True, help='label sequence, e.g. "Issue|Conclusion"')
    p_sentbs.add_argument("--input", required=True, help="document text file")
    p_sentbs.add_argument("--scorer", required=True, help="'mock' or scorer URL")
    p_sentbs.add_argument("--lambda", dest="likelihood_weight", type=float, default=0.5)
    p_sentbs.add_argument("--mode", choices=("sentence", "segment"), default="sentence")
    p_sentbs.add_argument("--num-candidates", type=int, default=4)
    p_sentbs.add_argument("--trace", default=None, help="write the decode trace JSON here")
    p_sentbs.add_argument("--no-timing", action="store_true")
    _add_scorer_flags(p_sentbs)
    _add_common(p_sentbs)

    p_label = commands.add_parser("label", help="silver-label a corpus")
    p_label.add_argument("--corpus", required=True)
    p_label.add_argument("--out", required=True)
    p_label.add_argument("--classifier", required=True, help="'mock' or scorer URL")
    p_label.add_argument("--min-confidence", type=float, default=0.0)
    _add_scorer_flags(p_label)
    _add_common(p_label)

    p_compare = commands.add_parser("compare", help="paired bootstrap between two reports")
    p_compare.add_argument("--a", required=True, help="report JSON for system A")
    p_compare.add_argument("--b", required=True, help="report JSON for system B")
    p_compare.add_argument("--metric", default="rouge2.f1")
    p_compare.add_argument("--resamples", type=int, default=1000)
    p_compare.add_argument("--confidence", type=float, default=0.95)
    p_compare.add_argument("--out", default=None)
    p_compare.add_argument(
        "--fail-on-significant",
        action="store_true",
        help="exit 1 when the difference is significant",
    )
    _add_common(p_compare)

    p_run = commands.add_parser("run", help="generate with a scorer, then evaluate")
    p_run.add_argument("--corpus", required=True)
    p_run.add_argument("--scorer", required=True, help="'mock' or scorer URL")
    p_run.add_argument("--mode", choices=END_TO_END_MODES, default="sentbs")
    p_run.add_argument("--structure-source", choices=("gold", "predicted"), default="gold")
    p_run.add_argument("--lambda", dest="likelihood_weight", type=float, default=0.5)
    p_run.add_argument("--ctrl", choices=("sentence", "segment"), default="sentence")
    p_run.add_argument("--num-candidates", type=int, default=4)
    p_run.add_argument("--max-tokens", type=int, default=256)
    p_run.add_argument("--overlap", action="store_true")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--no-timing", action="store_true")
    p_run.add_argument(
        "--keep-partial",
        action="store_true",
        help="flush the partial report when the scorer fails mid-corpus",
    )
    _add_scorer_flags(p_run)
    _add_common(p_run)

    return parser


def _emit_report(report, args) -> None:
    if args.format == "csv":
        text = report_to_csv(report)
        if args.out is None or args.out == "-":
            sys.stdout.write(text)
        else:
            Path(args.out).write_text(text, encoding="utf-8")
    else:
        include_timing = not getattr(args, "no_timing", False)
        _write_json(report_to_json_dict(report, include_timing=include_timing), args.out)


def _cmd_evaluate(args) -> int:
    records = load_corpus(args.references)
    if args.predictions:
        predictions = {}
        with open(args.predictions, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    obj = json.loads(line)
                    predictions[obj["id"]] = obj["prediction"]
        records = merge_predictions(records, predictions)
    classifier = (
        _make_scorer(args.classifier, args.seed, args.banks, args.eos_after, args.noise)
        if args.classifier
        else None
    )
    report = evaluate_records(
        records,
        classifier=classifier,
        overlap=args.overlap,
        workers=max(args.workers, 1),
        config={
            "command": "evaluate",
            "references": args.references,
            "predictions": args.predictions,
            "classifier": args.classifier,
            "overlap": args.overlap,
            "workers": max(args.workers, 1),
            "seed": args.seed,
        },
    )
    _emit_report(report, args)
    return 0


def _cmd_analyze(args) -> int:
    records = load_corpus(args.corpus)
    sequences = []
    for record in records:
        labels = record.gold_labels if args.labels == "gold" else record.predicted_labels
        if labels is None:
            raise StructsumError(f"record {record.id!r} lacks {args.labels} labels")
        sequences.append(labels)
    distribution = pattern_distribution(sequences)
    payload = distribution.to_json_dict()
    if args.upper_bound:
        if not args.classifier:
            raise StructsumError("--upper-bound needs --classifier")
        classifier = _make_scorer(args.classifier, args.seed, args.banks, args.eos_after, args.noise)
        payload["upper_bound_similarity"] = structure_upper_bound(records, classifier)
    _write_json(payload, args.out)
    if not args.quiet:
        print(f"{'pattern':<40}{'count':>8}{'share':>8}", file=sys.stderr)
        for pattern, count, share in distribution.entries()[: args.top]:
            shown = pattern if pattern else "(empty)"
            print(f"{shown:<40}{count:>8}{share:>8.3f}", file=sys.stderr)
    return 0


def _cmd_prompt_build(args) -> int:
    labels = parse_label_sequence(args.labels.replace(" | ", "|"), "|")
    document = Path(args.input).read_text(encoding="utf-8").rstrip("\n")
    cfg = PromptConfig(label_separator=args.sep, marker=args.marker)
    sys.stdout.write(build_prompt(labels, document, cfg) + "\n")
    return 0


def _cmd_decode_sentbs(args) -> int:
    structure = parse_label_sequence(args.structure.replace(" | ", "|"), "|")
    document = Path(args.input).read_text(encoding="utf-8").rstrip("\n")
    scorer = _make_scorer(args.scorer, args.seed, args.banks, args.eos_after, args.noise)
    cfg = DecodeConfig(
        mode="segment_ctrl" if args.mode == "segment" else "sentence_ctrl",
        likelihood_weight=args.likelihood_weight,
        gen=GenerationParams(num_candidates=args.num_candidates, seed=args.seed),
    )
    trace = decode_sentbs(document, structure, scorer, cfg)
    sys.stdout.write(trace.final_summary + "\n")
    if args.trace:
        _write_json(trace.to_json_dict(include_timing=not args.no_timing), args.trace)
    return 0


def _cmd_label(args) -> int:
    records = load_corpus(args.corpus)
    classifier = _make_scorer(args.classifier, args.seed, args.banks, args.eos_after, args.noise)
    try:
        labeled, report = silver_label(records, classifier, args.min_confidence)
        write_corpus(labeled, args.out)
    except StructsumError:
        # never leave a half-written output behind
        Path(args.out).unlink(missing_ok=True)
        raise
    if not args.quiet:
        histogram = {label.value: count for label, count in report.label_histogram.items()}
        print(
            json.dumps(
                {
                    "labeled": report.labeled,
                    "skipped": report.skipped,
                    "low_confidence": report.low_confidence,
                    "label_histogram": histogram,
                    "mean_confidence": report.mean_confidence,
                },
                indent=2,
            ),
            file=sys.stderr,
        )
    return 0


def _cmd_compare(args) -> int:
    report_a = report_from_json_dict(json.loads(Path(args.a).read_text(encoding="utf-8")))
    report_b = report_from_json_dict(json.loads(Path(args.b).read_text(encoding="utf-8")))
    result = compare_reports(
        report_a,
        report_b,
        args.metric,
        confidence=args.confidence,
        resamples=args.resamples,
        seed=args.seed,
    )
    _write_json(result.to_json_dict(), args.out)
    if args.fail_on_significant and result.significant:
        return 1
    return 0


def _cmd_run(args) -> int:
    records = load_corpus(args.corpus)
    scorer = _make_scorer(args.scorer, args.seed, args.banks, args.eos_after, args.noise)
    cfg = DecodeConfig(
        mode="segment_ctrl" if args.ctrl == "segment" else "sentence_ctrl",
        likelihood_weight=args.likelihood_weight,
        gen=GenerationParams(
            num_candidates=args.num_candidates,
            min_tokens=min(64, args.max_tokens),
            max_tokens=args.max_tokens,
            seed=args.seed,
        ),
    )
    try:
        report = end_to_end(
            records,
            scorer,
            mode=args.mode,
            structure_source=args.structure_source,
            decode_cfg=cfg,
            overlap=args.overlap,
            workers=max(args.workers, 1),
        )
    except StructsumError as err:
        partial = getattr(err, "partial_report", None)
        if args.keep_partial and partial is not None:
            partial.config.update({"command": "run", "partial": True})
            _emit_report(partial, args)
        raise
    report.config.update(
        {
            "command": "run",
            "corpus": args.corpus,
            "scorer": args.scorer,
            "seed": args.seed,
            "overlap": args.overlap,
        }
    )
    _emit_report(report, args)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "prompt":
            return _cmd_prompt_build(args)
        if args.command == "decode":
            return _cmd_decode_sentbs(args)
        if args.command == "label":
            return _cmd_label(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "run":
            return _cmd_run(args)
        parser.error(f"unknown command {args.command!r}")
    except StructsumError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as err:
        print(f"error: invalid JSON: {err}", file=sys.stderr)
        return 2
    return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
