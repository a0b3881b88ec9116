"""Command-line entry point: index, rank, eval, tune, significance.

Every long option can also come from a ``--config`` file of ``key = value``
lines (``#`` comments); flags on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import datasets, evaluation, ir_engine, pipelines, tuner
from .embeddings import EmbeddingFormatError, load_with_cache
from .scoring import VARIANTS, AlignmentConfig
from .text_prep import Lexicons, compute_idf

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 2, 3

log = logging.getLogger("alignqa")


class UsageError(Exception):
    pass


def read_config(path: str | Path) -> dict[str, str]:
    conf = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        conf[key.strip().replace("-", "_")] = value.strip()
    return conf


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def _add_lexicon_args(p):
    p.add_argument("--stoplist", help="stopword file (one per line); default: shipped English list")
    p.add_argument("--lemmas", help="lemma TSV (inflected<TAB>lemma); default: shipped table")


def _add_bm25_args(p):
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--bm25-idf", choices=ir_engine.IDF_VARIANTS, default="plus_one")


def _add_scoring_args(p):
    p.add_argument("--dataset", help="question file")
    p.add_argument("--format", choices=("wikiqa_tsv", "mc_jsonl"), default="wikiqa_tsv")
    p.add_argument("--embeddings", help="GloVe-style text vectors (.txt or .txt.gz)")
    p.add_argument("--expected-dim", type=int)
    p.add_argument("--cache", help="binary vector cache path (rebuilt when the vector file changes)")
    p.add_argument("--kb", help="knowledge-base corpus (lines or JSONL)")
    p.add_argument("--index", help="prebuilt index file from 'alignqa index'")
    p.add_argument("--clamp-idf", action="store_true", help="floor negative question IDF at 0")
    p.add_argument("--threads", type=int, default=1)
    _add_lexicon_args(p)
    _add_bm25_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alignqa", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value defaults for the subcommand")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a BM25 index over a KB corpus")
    p.add_argument("--kb", required=True)
    p.add_argument("--output", required=True)
    _add_lexicon_args(p)
    _add_bm25_args(p)

    p = sub.add_parser("rank", help="rank candidates and write a run file")
    _add_scoring_args(p)
    p.add_argument("--pipeline", choices=pipelines.PIPELINES, default="direct")
    p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--k-pos", type=int, default=1)
    p.add_argument("--k-neg", type=int, default=0)
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.0)
    p.add_argument("--n-justifications", type=int, default=5)
    p.add_argument("--output", required=True, help="run file (TSV)")
    p.add_argument("--explain", help="write per-candidate score breakdowns as JSONL")
    p.add_argument("--gold-out", help="also write the dataset's gold file")

    p = sub.add_parser("eval", help="MAP or P@1 of a run file")
    p.add_argument("--run", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--metric", choices=evaluation.METRICS, default="map")
    p.add_argument("--per-question", action="store_true")

    p = sub.add_parser("tune", help="grid search on a development split")
    _add_scoring_args(p)
    p.add_argument("--grid", required=True)
    p.add_argument("--metric", choices=evaluation.METRICS)
    p.add_argument("--table-out", help="write every grid cell's score as CSV")

    p = sub.add_parser("significance", help="paired one-tailed bootstrap test, A > B")
    p.add_argument("--run-a", required=True)
    p.add_argument("--run-b", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--metric", choices=evaluation.METRICS, default="map")
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    conf = read_config(known.config)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    known_dests = {a.dest for sp in sub_action.choices.values() for a in sp._actions}
    for key in conf:
        if ("lambda_" if key == "lambda" else key) not in known_dests:
            raise UsageError(f"{known.config}: unknown key {key!r}")
    for sp in sub_action.choices.values():
        dests = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, raw in conf.items():
            dest = "lambda_" if key == "lambda" else key
            action = dests.get(dest)
            if action is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                defaults[dest] = _bool(raw)
            else:
                value = action.type(raw) if action.type else raw
                if action.choices and value not in action.choices:
                    raise UsageError(f"config {key}: {value!r} not in {sorted(action.choices)}")
                defaults[dest] = value
                action.required = False
        sp.set_defaults(**defaults)


@dataclass
class RunConfig:
    """Validated inputs for rank/tune, checked before any heavy loading."""

    pipeline: str
    dataset: Path
    fmt: str
    embeddings: Path | None
    kb: Path | None
    index: Path | None
    cfg: AlignmentConfig | None

    @classmethod
    def from_args(cls, args, pipeline: str, cfg: AlignmentConfig | None) -> "RunConfig":
        if not args.dataset:
            raise UsageError("--dataset is required")
        dataset = Path(args.dataset)
        if not dataset.is_file():
            raise UsageError(f"dataset not found: {dataset}")
        needs_vectors = pipeline in ("direct", "kb")
        if needs_vectors and not args.embeddings:
            raise UsageError("--embeddings is required for the alignment pipelines")
        if needs_vectors and not Path(args.embeddings).is_file():
            raise UsageError(f"embedding file not found: {args.embeddings}")
        needs_kb = pipeline in ("kb", "ai2")
        if needs_kb and not (args.kb or args.index):
            raise UsageError(f"pipeline {pipeline!r} needs --kb or --index")
        if not needs_kb and (args.kb or args.index):
            raise UsageError(f"pipeline {pipeline!r} does not use a knowledge base")
        for name in ("kb", "index"):
            value = getattr(args, name)
            if value and not Path(value).is_file():
                raise UsageError(f"{name} file not found: {value}")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return cls(pipeline, dataset, args.format, Path(args.embeddings) if args.embeddings else None,
                   Path(args.kb) if args.kb else None, Path(args.index) if args.index else None, cfg)


def _lexicons(args) -> Lexicons:
    for name in ("stoplist", "lemmas"):
        value = getattr(args, name)
        if value and not Path(value).is_file():
            raise UsageError(f"{name} file not found: {value}")
    if not args.stoplist and not args.lemmas:
        return Lexicons.default()
    return Lexicons.from_files(args.stoplist, args.lemmas)


def _resolve_index(rc: RunConfig, args, lex: Lexicons) -> ir_engine.InvertedIndex:
    docs = datasets.load_kb(rc.kb, lex) if rc.kb else None
    if rc.index:
        expected = ir_engine.corpus_checksum(docs) if docs is not None else None
        try:
            return ir_engine.load_index(rc.index, expected)
        except ir_engine.StaleIndexError:
            log.warning("index %s is stale for %s; rebuilding in memory", rc.index, rc.kb)
        except ir_engine.IndexFormatError as exc:
            raise UsageError(str(exc)) from None
    return ir_engine.build_index(docs, args.k1, args.b, args.bm25_idf)


def _prepare(args, rc: RunConfig):
    lex = _lexicons(args)
    try:
        instances = datasets.load_dataset(rc.dataset, rc.fmt, lex)
    except datasets.DatasetFormatError as exc:
        raise UsageError(str(exc)) from None
    if not instances:
        raise UsageError(f"no questions in {rc.dataset}")
    idf = compute_idf([inst.question_terms for inst in instances], clamp=args.clamp_idf)
    table = None
    if rc.embeddings:
        try:
            table = load_with_cache(rc.embeddings, args.cache, args.expected_dim)
        except EmbeddingFormatError as exc:
            raise UsageError(f"{rc.embeddings}: {exc}") from None
    index = _resolve_index(rc, args, lex) if (rc.kb or rc.index) else None
    return instances, idf, table, index


def cmd_index(args) -> int:
    if not Path(args.kb).is_file():
        raise UsageError(f"KB file not found: {args.kb}")
    lex = _lexicons(args)
    docs = datasets.load_kb(args.kb, lex)
    if not docs:
        raise UsageError(f"no documents in {args.kb}")
    try:
        index = ir_engine.build_index(docs, args.k1, args.b, args.bm25_idf)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ir_engine.save_index(index, args.output)
    print(json.dumps({"n_docs": index.n_docs, "avg_doc_len": index.avg_doc_len, "checksum": index.checksum}))
    return EXIT_OK


def cmd_rank(args) -> int:
    try:
        cfg = AlignmentConfig(args.k_pos, args.k_neg, args.lambda_, args.variant, args.n_justifications)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rc = RunConfig.from_args(args, args.pipeline, cfg)
    instances, idf, table, index = _prepare(args, rc)

    if rc.pipeline == "direct":
        def ranker(inst, buf=None):
            return pipelines.rank_direct(inst, idf, table, cfg, buf)
    elif rc.pipeline == "kb":
        def ranker(inst, buf=None):
            return pipelines.rank_kb(inst, index, idf, table, cfg, buf)
    elif rc.pipeline == "bm25":
        def ranker(inst, buf=None):
            return pipelines.rank_bm25(inst, args.k1, args.b, args.bm25_idf)
    else:
        def ranker(inst, buf=None):
            return pipelines.rank_ai2(inst, index, cfg.n_justifications)

    if args.explain:
        runs, lines = pipelines.explain_lines(instances, ranker, args.threads)
        Path(args.explain).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    else:
        runs = pipelines.run_all(instances, ranker, args.threads)
    pipelines.write_run(runs, args.output)
    if args.gold_out:
        Path(args.gold_out).write_text(pipelines.format_gold(instances), encoding="utf-8")
    log.info("ranked %d questions -> %s", len(runs), args.output)
    return EXIT_OK


def _load_run_and_gold(run_path, gold_path):
    for p in (run_path, gold_path):
        if not Path(p).is_file():
            raise UsageError(f"file not found: {p}")
    try:
        return pipelines.read_run(run_path), evaluation.read_gold(gold_path)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_eval(args) -> int:
    runs, gold = _load_run_and_gold(args.run, args.gold)
    evaluation.check_alignment(runs, gold)
    report = evaluation.evaluate(runs, gold, args.metric)
    print(json.dumps(report.to_dict(args.per_question), sort_keys=True))
    return EXIT_OK


def cmd_significance(args) -> int:
    if args.iterations < 1:
        raise UsageError("--iterations must be >= 1")
    runs_a, gold = _load_run_and_gold(args.run_a, args.gold)
    runs_b, _ = _load_run_and_gold(args.run_b, args.gold)
    evaluation.check_alignment(runs_a, gold)
    evaluation.check_alignment(runs_b, gold)
    ids_a = [r.question_id for r in runs_a]
    ids_b = [r.question_id for r in runs_b]
    if sorted(ids_a) != sorted(ids_b):
        diff = sorted(set(ids_a) ^ set(ids_b))
        raise evaluation.RunGoldMismatch(f"question {diff[0]!r} appears in only one of the runs")
    rep_a = evaluation.evaluate(runs_a, gold, args.metric)
    rep_b = evaluation.evaluate(runs_b, gold, args.metric)
    _, a, b = evaluation.paired_scores(rep_a, rep_b)
    p = evaluation.bootstrap_significance(a, b, args.iterations, args.seed)
    out = rep_a.to_dict()
    out.update({"value_b": rep_b.value, "p_value": p, "iterations": args.iterations, "seed": args.seed})
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_tune(args) -> int:
    if not Path(args.grid).is_file():
        raise UsageError(f"grid file not found: {args.grid}")
    try:
        grid = tuner.load_grid(args.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.metric:
        grid = tuner.GridSpec(grid.k_pos_values, grid.k_neg_values, grid.lambda_values, grid.n_values, args.metric)
    pipeline = "kb" if (args.kb or args.index) else "direct"
    rc = RunConfig.from_args(args, pipeline, None)
    instances, idf, table, index = _prepare(args, rc)
    ctx = tuner.PipelineContext(idf, table, index, args.threads)
    result = tuner.grid_search(instances, grid, ctx)
    if args.table_out:
        Path(args.table_out).write_text(result.to_csv(), encoding="utf-8")
    best = result.best
    print(json.dumps({
        "metric": grid.metric,
        "score": result.score,
        "k_pos": best.k_pos,
        "k_neg": best.k_neg,
        "lambda": best.lambda_,
        "n_justifications": best.n_justifications if index is not None else None,
        "cells": len(result.table),
    }, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "index": cmd_index,
    "rank": cmd_rank,
    "eval": cmd_eval,
    "tune": cmd_tune,
    "significance": cmd_significance,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UsageError, OSError, ValueError) as exc:
        print(f"alignqa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"alignqa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except evaluation.RunGoldMismatch as exc:
        print(f"alignqa: mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
