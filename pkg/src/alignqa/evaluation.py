"""MAP / P@1 over ranked lists and a paired one-tailed bootstrap test."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pipelines import RankedList

METRICS = ("map", "p1")


class RunGoldMismatch(ValueError):
    pass


def average_precision(ranked: RankedList, gold) -> float | None:
    """Uncut average precision; ``None`` (skipped) when no gold candidate is in the list."""
    gold = set(gold)
    hits = 0
    total = 0.0
    for k, cid in enumerate(ranked.candidate_ids, 1):
        if cid in gold:
            hits += 1
            total += hits / k
    if hits == 0:
        return None
    return total / hits


def precision_at_1(ranked: RankedList, gold) -> int:
    if not gold:
        raise ValueError(f"{ranked.question_id}: P@1 needs at least one gold candidate")
    return int(bool(ranked.entries) and ranked.top in gold)


@dataclass
class EvalReport:
    metric: str
    value: float
    n_evaluated: int
    n_skipped: int
    per_question: dict[str, float] = field(default_factory=dict)

    def to_dict(self, with_per_question: bool = False) -> dict:
        d = {"metric": self.metric, "value": self.value, "n_evaluated": self.n_evaluated, "n_skipped": self.n_skipped}
        if with_per_question:
            d["per_question"] = self.per_question
        return d


def evaluate(runs: Iterable[RankedList], gold: Mapping[str, Iterable[str]], metric: str = "map") -> EvalReport:
    """Score every ranked list; questions with no gold answer are skipped for either metric."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    per_question: dict[str, float] = {}
    skipped = 0
    for rl in runs:
        g = set(gold.get(rl.question_id, ()))
        if metric == "map":
            ap = average_precision(rl, g)
        else:
            ap = precision_at_1(rl, g) if g else None
        if ap is None:
            skipped += 1
        else:
            per_question[rl.question_id] = float(ap)
    value = float(np.mean(list(per_question.values()))) if per_question else 0.0
    return EvalReport(metric, value, len(per_question), skipped, per_question)


def read_gold(path: str | Path) -> dict[str, set[str]]:
    gold: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'question_id<TAB>candidate_id'")
            gold.setdefault(cols[0], set()).add(cols[1])
    return gold


def check_alignment(runs: Sequence[RankedList], gold: Mapping[str, Iterable[str]]) -> None:
    """Raise :class:`RunGoldMismatch` on the first gold entry the run cannot account for."""
    by_q = {rl.question_id: set(rl.candidate_ids) for rl in runs}
    for qid, cands in gold.items():
        if qid not in by_q:
            raise RunGoldMismatch(f"question {qid!r} is in the gold file but not in the run")
        missing = sorted(set(cands) - by_q[qid])
        if missing:
            raise RunGoldMismatch(f"question {qid!r}: gold candidate {missing[0]!r} is not in the run")


def bootstrap_significance(per_q_a: Sequence[float], per_q_b: Sequence[float], iterations: int = 10_000,
                           seed: int = 0, chunk: int = 1000) -> float:
    """One-tailed paired bootstrap p-value for "system A beats system B".

    Question indices are resampled with replacement; p is the share of
    resamples in which A's mean does not exceed B's (delta <= 0). Random
    draws come from one seeded generator in fixed-size chunks, so the
    result depends only on the inputs and ``seed``.
    """
    a = np.asarray(per_q_a, dtype=np.float64)
    b = np.asarray(per_q_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("need at least one question")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    delta = a - b
    n = delta.size
    rng = np.random.default_rng(seed)
    not_better = 0
    done = 0
    while done < iterations:
        m = min(chunk, iterations - done)
        idx = rng.integers(0, n, size=(m, n))
        not_better += int(np.count_nonzero(delta[idx].mean(axis=1) <= 0))
        done += m
    return not_better / iterations


def paired_scores(report_a: EvalReport, report_b: EvalReport) -> tuple[list[str], list[float], list[float]]:
    """Per-question scores for the questions both reports evaluated, in A's order."""
    qids = [q for q in report_a.per_question if q in report_b.per_question]
    return qids, [report_a.per_question[q] for q in qids], [report_b.per_question[q] for q in qids]


def report_json(report: EvalReport, p_value: float | None = None) -> str:
    d = report.to_dict()
    if p_value is not None:
        d["p_value"] = p_value
    return json.dumps(d, sort_keys=True)
