"""Exhaustive grid search over (K+, K-, lambda, N) on a development split."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .datasets import QAInstance
from .embeddings import EmbeddingTable
from .evaluation import evaluate
from .ir_engine import InvertedIndex
from .pipelines import rank_direct, rank_kb, run_all
from .scoring import AlignmentConfig
from .text_prep import IdfTable

GRID_KEYS = ("k_pos", "k_neg", "lambda", "n")


@dataclass(frozen=True)
class GridSpec:
    k_pos_values: tuple[int, ...] = (1,)
    k_neg_values: tuple[int, ...] = (0,)
    lambda_values: tuple[float, ...] = (0.0,)
    n_values: tuple[int, ...] = (5,)
    metric: str = "map"

    def __post_init__(self):
        for name in ("k_pos_values", "k_neg_values", "lambda_values", "n_values"):
            values = tuple(sorted(getattr(self, name)))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, values)
        if self.metric not in ("map", "p1"):
            raise ValueError(f"unknown metric {self.metric!r}")

    def cells(self, uses_n: bool = True) -> list[AlignmentConfig]:
        """All distinct configs in lexicographic (K+, K-, lambda, N) order.

        K- = 0 cells appear once with lambda 0, since lambda cannot affect
        them. Without a KB the N axis collapses to its smallest value.
        """
        ns = self.n_values if uses_n else self.n_values[:1]
        out = []
        for kp in self.k_pos_values:
            for kn in self.k_neg_values:
                lams = self.lambda_values if kn > 0 else (0.0,)
                for lam in lams:
                    for n in ns:
                        out.append(AlignmentConfig(kp, kn, lam, "full", n))
        return out


def parse_grid(text: str) -> GridSpec:
    """Read ``key = v1, v2, ...`` lines (keys: k_pos, k_neg, lambda, n, metric)."""
    values: dict[str, list] = {}
    metric = "map"
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ValueError(f"grid line {lineno}: expected key = values")
        if key == "metric":
            metric = rest.strip()
            continue
        if key not in GRID_KEYS:
            raise ValueError(f"grid line {lineno}: unknown key {key!r}")
        cast = float if key == "lambda" else int
        values[key] = [cast(v) for v in rest.replace(",", " ").split()]
    return GridSpec(
        tuple(values.get("k_pos", [1])),
        tuple(values.get("k_neg", [0])),
        tuple(values.get("lambda", [0.0])),
        tuple(values.get("n", [5])),
        metric,
    )


def load_grid(path: str | Path) -> GridSpec:
    return parse_grid(Path(path).read_text(encoding="utf-8"))


@dataclass
class PipelineContext:
    """What a grid cell needs to produce a run: scoring resources plus an optional KB."""

    idf: IdfTable
    table: EmbeddingTable
    index: InvertedIndex | None = None
    threads: int = 1

    def evaluate(self, dev: Sequence[QAInstance], cfg: AlignmentConfig, metric: str) -> float:
        if self.index is None:
            runs = run_all(dev, lambda inst: rank_direct(inst, self.idf, self.table, cfg), self.threads)
        else:
            runs = run_all(dev, lambda inst: rank_kb(inst, self.index, self.idf, self.table, cfg), self.threads)
        gold = {inst.question_id: inst.gold for inst in dev}
        return evaluate(runs, gold, metric).value


@dataclass
class TuneResult:
    best: AlignmentConfig
    score: float
    table: list[tuple[AlignmentConfig, float]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k_pos", "k_neg", "lambda", "n", "score"])
        for cfg, score in self.table:
            w.writerow([cfg.k_pos, cfg.k_neg, cfg.lambda_, cfg.n_justifications, f"{score:.6f}"])
        return buf.getvalue()


def grid_search(dev: Sequence[QAInstance], grid: GridSpec, context: PipelineContext) -> TuneResult:
    """Evaluate every cell; the highest score wins, earliest cell on ties."""
    if not dev:
        raise ValueError("empty development set")
    rows = []
    best_cfg, best_score = None, float("-inf")
    for cfg in grid.cells(uses_n=context.index is not None):
        score = context.evaluate(dev, cfg, grid.metric)
        rows.append((cfg, score))
        if score > best_score:
            best_cfg, best_score = cfg, score
    return TuneResult(best_cfg, best_score, rows)
