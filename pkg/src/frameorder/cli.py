"""Command-line interface.

Subcommands compose the pipeline stages; ``pipeline`` runs them all. Progress
goes to stderr, machine-readable artifacts go to files (or stdout for
``verify``). Identical config and inputs produce byte-identical score files,
partition reports, and manifests.

Exit codes: 0 success, 1 input/data error, 2 usage error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from . import analysis, plots
from .config import PipelineConfig, build_config
from .corpus import Corpus, load_corpus, load_scores, write_scores
from .demo import bundled_demo_path
from .errors import FrameOrderError
from .manifest import SCHEDULES, OrderedManifest, read_manifest, write_manifest
from .partition import (
    QuadrantPartition,
    partition_quadrants,
    read_partition_report,
    two_way_partition,
    write_partition_report,
)
from .scheduler import SShapeParams, build_ablation, verify_stage_constraints
from .scorer import ScoredSample, attach_external_scores, score_corpus, train_ngram

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _log(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# Shared loading helpers
# ---------------------------------------------------------------------------


def _resolve_corpus_path(config: PipelineConfig) -> Path:
    if not config.corpus_path:
        raise FrameOrderError("no corpus given (set --corpus or corpus_path in the config)")
    if config.corpus_path == "demo":
        return bundled_demo_path()
    return Path(config.corpus_path)


def _load_corpus(config: PipelineConfig, need_text: bool) -> Corpus:
    path = _resolve_corpus_path(config)
    if not path.exists():
        raise FrameOrderError(f"corpus file not found: {path}")
    corpus = load_corpus(
        path,
        format=config.corpus_format,
        tokenizer=config.tokenizer,
        retain_text=need_text,
    )
    if need_text and config.score_source == "builtin" and not corpus.has_text():
        raise FrameOrderError(
            "the built-in scorer needs document text, but the corpus has "
            "records without a text field; provide external scores instead"
        )
    return corpus


def _scored_samples(config: PipelineConfig, corpus: Corpus) -> list[ScoredSample]:
    if config.score_source == "external":
        scores_path = Path(config.scores_path)
        if not scores_path.exists():
            raise FrameOrderError(f"score file not found: {scores_path}")
        return attach_external_scores(
            corpus, load_scores(scores_path), strict=config.strict, warn=_log
        )
    weak = train_ngram(corpus, config.weak_order, config.smoothing_k)
    strong = train_ngram(corpus, config.strong_order, config.smoothing_k)
    return score_corpus(corpus, weak, strong, threads=config.threads)


def _out_dir(config: PipelineConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_manifest(config, scored, partition) -> OrderedManifest:
    params = SShapeParams(a=config.steepness)
    if config.schedule.startswith("two_stage_"):
        metric = "ppl" if "ppl" in config.schedule else "pd"
        source = two_way_partition(scored, metric)
    else:
        source = partition
    return build_ablation(source, config.schedule, config.batch_size, params, config.seed)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_score(config: PipelineConfig) -> int:
    corpus = _load_corpus(config, need_text=config.score_source == "builtin")
    scored = _scored_samples(config, corpus)
    out = _out_dir(config) / "scores.jsonl"
    write_scores(scored, out)
    _log(f"scored {len(scored)} samples -> {out}")
    return EXIT_OK


def cmd_partition(config: PipelineConfig) -> int:
    corpus = _load_corpus(config, need_text=config.score_source == "builtin")
    scored = _scored_samples(config, corpus)
    partition = partition_quadrants(scored)
    out = _out_dir(config) / "partition.jsonl"
    write_partition_report(partition, out)
    _log(f"partitioned {len(scored)} samples -> {out}")
    _log(f"token totals: {partition.token_totals}")
    return EXIT_OK


def cmd_order(config: PipelineConfig) -> int:
    corpus = _load_corpus(config, need_text=config.score_source == "builtin")
    scored = _scored_samples(config, corpus)
    partition = partition_quadrants(scored)
    out_dir = _out_dir(config)
    write_partition_report(partition, out_dir / "partition.jsonl")
    manifest = _build_manifest(config, scored, partition)
    write_manifest(manifest, out_dir / "manifest.jsonl")
    _log(
        f"ordered {len(scored)} samples into {len(manifest.batches)} batches "
        f"({config.schedule}, N={config.batch_size}) -> {out_dir / 'manifest.jsonl'}"
    )
    report = verify_stage_constraints(manifest, partition)
    for line in report.summary_lines():
        _log(line)
    if config.figures:
        fig = plots.render_stage_composition(manifest, out_dir / "figures" / "stage_composition.png")
        _log(f"figure -> {fig}")
    return EXIT_OK


def cmd_verify(config: PipelineConfig, manifest_path, partition_path) -> int:
    manifest = read_manifest(manifest_path)
    partition = read_partition_report(partition_path)
    report = verify_stage_constraints(manifest, partition)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    for line in report.summary_lines():
        _log(line)
    return EXIT_OK


def cmd_analyze(config: PipelineConfig, manifest_path=None) -> int:
    corpus = _load_corpus(config, need_text=config.score_source == "builtin")
    scored = _scored_samples(config, corpus)
    partition = partition_quadrants(scored)
    out_dir = _out_dir(config)
    fig_dir = out_dir / "figures"

    reports = []
    for metric in ("ppl", "pd"):
        for group_name, groups in (
            ("quadrant", analysis.group_by_quadrant(partition, scored)),
            ("domain", analysis.group_by_domain(corpus, scored)),
        ):
            group_reports = analysis.distribution_stats(groups, metric, config.bins)
            reports.extend(group_reports)
            if config.figures:
                plots.render_distributions(
                    group_reports, fig_dir / f"dist_{metric}_by_{group_name}.png"
                )
    dist_path = out_dir / "distributions.jsonl"
    with open(dist_path, "w", encoding="utf-8", newline="") as fh:
        for rep in reports:
            fh.write(json.dumps(rep.to_dict(), sort_keys=True, separators=(",", ":")) + "\n")
    _log(f"distribution reports -> {dist_path}")

    if manifest_path is not None and config.figures:
        manifest = read_manifest(manifest_path)
        plots.render_stage_composition(manifest, fig_dir / "stage_composition.png")

    if config.loss_curves:
        curves = []
        for curve_path in config.loss_curves:
            p = Path(curve_path)
            if not p.exists():
                raise FrameOrderError(f"loss-curve file not found: {p}")
            curves.append(analysis.load_loss_curve(p))
        spectral = analysis.compare_smoothness(curves, config.cutoff_fraction)
        spec_path = out_dir / "spectral.jsonl"
        with open(spec_path, "w", encoding="utf-8", newline="") as fh:
            for rep in spectral:
                fh.write(json.dumps(rep.to_dict(), sort_keys=True, separators=(",", ":")) + "\n")
        table_path = out_dir / "smoothness.csv"
        with open(table_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("name,high_freq_ratio,cutoff_fraction\n")
            for rep in spectral:
                fh.write(f"{rep.name},{rep.high_freq_ratio!r},{rep.cutoff_fraction!r}\n")
        _log(f"spectral reports -> {spec_path}, {table_path}")
        if config.figures:
            plots.render_spectra(curves, spectral, fig_dir / "loss_spectra.png")
            plots.render_smoothness(spectral, fig_dir / "smoothness.png")
    return EXIT_OK


def cmd_pipeline(config: PipelineConfig) -> int:
    corpus = _load_corpus(config, need_text=config.score_source == "builtin")
    scored = _scored_samples(config, corpus)
    out_dir = _out_dir(config)
    write_scores(scored, out_dir / "scores.jsonl")
    _log(f"scores -> {out_dir / 'scores.jsonl'}")

    partition = partition_quadrants(scored)
    write_partition_report(partition, out_dir / "partition.jsonl")
    _log(f"partition -> {out_dir / 'partition.jsonl'}")

    manifest = _build_manifest(config, scored, partition)
    write_manifest(manifest, out_dir / "manifest.jsonl")
    _log(f"manifest -> {out_dir / 'manifest.jsonl'}")
    report = verify_stage_constraints(manifest, partition)
    for line in report.summary_lines():
        _log(line)

    return cmd_analyze(config, manifest_path=out_dir / "manifest.jsonl")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file; flags override its values")
    parser.add_argument("--corpus", dest="corpus_path", help="corpus file, or 'demo' for the bundled corpus")
    parser.add_argument("--format", dest="corpus_format", choices=("jsonl", "tsv"))
    parser.add_argument("-o", "--output-dir", dest="output_dir")
    parser.add_argument("--scores", dest="scores_path", help="external score file (implies external scoring)")
    parser.add_argument("--weak-order", dest="weak_order", type=int)
    parser.add_argument("--strong-order", dest="strong_order", type=int)
    parser.add_argument("--smoothing-k", dest="smoothing_k", type=float)
    parser.add_argument("--tokenizer", choices=("whitespace", "bytes"))
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--steepness", type=float)
    parser.add_argument("--schedule", choices=SCHEDULES)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--cutoff", dest="cutoff_fraction", type=float)
    parser.add_argument("--bins", type=int)
    parser.add_argument("--loss-curve", dest="loss_curves", action="append", metavar="PATH")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--strict", action="store_const", const=True, default=None)
    parser.add_argument("--no-figures", dest="figures", action="store_const", const=False, default=None)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frameorder",
        description="Order a pretraining corpus into a four-stage curriculum manifest",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("score", "compute per-sample perplexities and difference scores"),
        ("partition", "assign token-balanced quadrant labels"),
        ("order", "build the ordered batch manifest (plus partition report)"),
        ("analyze", "distribution and loss-smoothness reports with figures"),
        ("pipeline", "score, partition, order, and analyze in one run"),
        ("verify", "check stage-ordering constraints of an existing manifest"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "verify":
            p.add_argument("--manifest", required=True)
            p.add_argument("--partition", dest="partition_path", required=True)
        if name == "analyze":
            p.add_argument("--manifest", help="optional manifest for the stage-composition figure")
    return parser


_CONFIG_KEYS = (
    "corpus_path", "corpus_format", "output_dir", "scores_path", "weak_order",
    "strong_order", "smoothing_k", "tokenizer", "batch_size", "steepness",
    "schedule", "seed", "cutoff_fraction", "bins", "loss_curves", "threads",
    "strict", "figures",
)


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
        if overrides.get("scores_path"):
            overrides["score_source"] = "external"
        config = build_config(args.config, overrides)
        if args.command == "score":
            return cmd_score(config)
        if args.command == "partition":
            return cmd_partition(config)
        if args.command == "order":
            return cmd_order(config)
        if args.command == "analyze":
            return cmd_analyze(config, manifest_path=getattr(args, "manifest", None))
        if args.command == "pipeline":
            return cmd_pipeline(config)
        if args.command == "verify":
            return cmd_verify(config, args.manifest, args.partition_path)
        parser.error(f"unknown command {args.command!r}")
    except FrameOrderError as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    except BrokenPipeError:
        return EXIT_OK
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
