"""End-to-end candidate ranking: direct reranking and KB-backed multiple choice."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .datasets import QAInstance
from .embeddings import EmbeddingTable
from .ir_engine import InvertedIndex, ai2_ir_score, bm25_rank_candidates, bm25_retrieve
from .scoring import AlignmentConfig, score_answer
from .text_prep import IdfTable

PIPELINES = ("direct", "kb", "bm25", "ai2")


@dataclass(frozen=True)
class RankedList:
    question_id: str
    entries: tuple[tuple[str, float], ...]

    @property
    def candidate_ids(self) -> list[str]:
        return [c for c, _ in self.entries]

    @property
    def top(self) -> str:
        return self.entries[0][0]


def make_ranked(question_id: str, scored: Sequence[tuple[str, float]]) -> RankedList:
    """Sort (candidate_id, score) pairs descending; ties keep input position."""
    order = sorted(range(len(scored)), key=lambda i: (-scored[i][1], i))
    return RankedList(question_id, tuple(scored[i] for i in order))


def rank_direct(instance: QAInstance, idf: IdfTable, table: EmbeddingTable, cfg: AlignmentConfig,
                explain: list | None = None) -> RankedList:
    scored = []
    for cand in instance.candidates:
        bd = score_answer(instance.question_terms, cand.terms, idf, table, cfg, explain=explain is not None)
        if explain is not None:
            explain.append(bd.to_json(question_id=instance.question_id, candidate_id=cand.candidate_id))
        scored.append((cand.candidate_id, bd.total))
    return make_ranked(instance.question_id, scored)


def rank_kb(instance: QAInstance, index: InvertedIndex, idf: IdfTable, table: EmbeddingTable,
            cfg: AlignmentConfig, explain: list | None = None) -> RankedList:
    """Score each choice by summing alignment scores over its retrieved justifications.

    Each choice gets its own BM25 query (question terms followed by
    choice terms) and its own top-N documents. The same concatenation is
    the aligned query side; each document is the answer side. Fewer than
    N hits sum over what was found.
    """
    scored = []
    for cand in instance.candidates:
        query = instance.question_terms + cand.terms
        total = 0.0
        for doc_id, _ in bm25_retrieve(query, index, cfg.n_justifications).hits:
            bd = score_answer(query, index.doc_terms[doc_id], idf, table, cfg, explain=explain is not None)
            if explain is not None:
                explain.append(bd.to_json(question_id=instance.question_id,
                                          candidate_id=cand.candidate_id, doc_id=doc_id))
            total += bd.total
        scored.append((cand.candidate_id, total))
    return make_ranked(instance.question_id, scored)


def rank_bm25(instance: QAInstance, k1: float = 1.2, b: float = 0.75, idf_variant: str = "plus_one") -> RankedList:
    cands = instance.candidates
    ranked = bm25_rank_candidates(instance.question_terms, [c.terms for c in cands], k1, b, idf_variant)
    return RankedList(instance.question_id, tuple((cands[i].candidate_id, s) for i, s in ranked))


def rank_ai2(instance: QAInstance, index: InvertedIndex, n: int) -> RankedList:
    scored = [(c.candidate_id, ai2_ir_score(instance.question_terms, c.terms, index, n)) for c in instance.candidates]
    return make_ranked(instance.question_id, scored)


def run_all(instances: Sequence[QAInstance], ranker: Callable[[QAInstance], RankedList],
            threads: int = 1) -> list[RankedList]:
    """Apply ``ranker`` to every instance; output follows input order at any thread count."""
    if threads <= 1:
        return [ranker(inst) for inst in instances]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(ranker, instances))


def format_run(runs: Iterable[RankedList]) -> str:
    lines = []
    for rl in runs:
        for rank, (cid, score) in enumerate(rl.entries, 1):
            lines.append(f"{rl.question_id}\t{cid}\t{rank}\t{score:.6f}\n")
    return "".join(lines)


def write_run(runs: Iterable[RankedList], path: str | Path) -> None:
    Path(path).write_text(format_run(runs), encoding="utf-8")


def read_run(path: str | Path) -> list[RankedList]:
    """Parse a run file back into ranked lists (order by the rank column)."""
    grouped: dict[str, list[tuple[int, str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 tab-separated columns")
            qid, cid, rank, score = cols
            grouped.setdefault(qid, []).append((int(rank), cid, float(score)))
    return [RankedList(qid, tuple((c, s) for _, c, s in sorted(rows))) for qid, rows in grouped.items()]


def format_gold(instances: Iterable[QAInstance]) -> str:
    lines = []
    for inst in instances:
        for cand in inst.candidates:
            if cand.candidate_id in inst.gold:
                lines.append(f"{inst.question_id}\t{cand.candidate_id}\n")
    return "".join(lines)


def explain_lines(instances: Sequence[QAInstance], ranker_with_explain: Callable[[QAInstance, list], RankedList],
                  threads: int = 1) -> tuple[list[RankedList], list[str]]:
    """Like :func:`run_all` but also collects per-candidate score breakdowns as JSON lines."""
    def one(inst):
        buf: list[str] = []
        return ranker_with_explain(inst, buf), buf

    results = run_all(instances, one, threads)
    return [r for r, _ in results], [line for _, buf in results for line in buf]

