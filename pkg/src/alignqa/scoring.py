"""IDF-weighted one-to-many positive/negative alignment scoring."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .embeddings import EmbeddingTable, ranked_rows
from .text_prep import TermList

VARIANTS = ("full", "one_to_one", "one_to_all")


@dataclass(frozen=True)
class AlignmentConfig:
    """Scoring hyperparameters.

    ``lambda_`` only matters when ``k_neg > 0``. ``n_justifications`` is
    read by the knowledge-base pipeline only.
    """

    k_pos: int = 1
    k_neg: int = 0
    lambda_: float = 0.0
    variant: str = "full"
    n_justifications: int = 5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k_pos < 1:
            raise ValueError("k_pos must be >= 1")
        if self.k_neg < 0:
            raise ValueError("k_neg must be >= 0")
        if self.n_justifications < 1:
            raise ValueError("n_justifications must be >= 1")
        if self.variant == "full" and self.k_neg == 0 and self.lambda_ != 0:
            warnings.warn("lambda is ignored when k_neg == 0", stacklevel=3)

    @property
    def effective(self) -> tuple[int, int]:
        """(K+, K-) actually applied; one_to_all reports (0, 0)."""
        if self.variant == "one_to_one":
            return 1, 0
        if self.variant == "one_to_all":
            return 0, 0
        return self.k_pos, self.k_neg


@dataclass
class TermScore:
    term: str
    idf: float
    pos: float
    neg: float
    align: float


@dataclass
class ScoreBreakdown:
    total: float
    per_term: list[TermScore] = field(default_factory=list)

    def to_json(self, **extra) -> str:
        record = dict(extra)
        record["total"] = self.total
        record["per_term"] = [asdict(t) for t in self.per_term]
        return json.dumps(record, sort_keys=True)


def _harmonic_sum(values) -> float:
    total = 0.0
    for k, v in enumerate(values, 1):
        total += float(v) / k
    return total


def _sims(ranked) -> Sequence[float]:
    return ranked.sims if hasattr(ranked, "pairs") else ranked


def pos_score(ranked, k_pos: int) -> float:
    """Harmonic-weighted sum of the ``k_pos`` highest similarities.

    ``ranked`` is a :class:`RankedSimilarities` or a descending sequence
    of similarity values; ``k_pos`` is clamped to its length.
    """
    return _harmonic_sum(_sims(ranked)[:k_pos])


def neg_score(ranked, k_neg: int) -> float:
    """Harmonic-weighted sum of the ``k_neg`` lowest similarities, lowest first.

    Raw (usually negative) cosines are summed, so a positive weight on
    this term penalizes off-topic answers.
    """
    sims = _sims(ranked)
    if k_neg <= 0 or len(sims) == 0:
        return 0.0
    return _harmonic_sum(sims[::-1][:k_neg])


def align_term(pos: float, neg: float, lambda_: float) -> float:
    return pos + lambda_ * neg


def score_one_to_all(ranked) -> float:
    return _harmonic_sum(_sims(ranked))


def score_answer(question: TermList | Sequence[str], answer: TermList | Sequence[str], idf,
                 table: EmbeddingTable, cfg: AlignmentConfig, explain: bool = False) -> ScoreBreakdown:
    """Score one candidate answer against a question.

    Every question position contributes its own summand, so repeated
    question terms count repeatedly. Out-of-vocabulary question terms
    align to nothing and contribute 0.
    """
    q_terms = list(question)
    rows = ranked_rows(q_terms, list(answer), table)
    k_pos, k_neg = cfg.effective
    total = 0.0
    per_term = []
    for term, row in zip(q_terms, rows):
        if cfg.variant == "one_to_all":
            pos, neg = score_one_to_all(row), 0.0
            align = pos
        else:
            pos = pos_score(row, k_pos)
            neg = neg_score(row, k_neg)
            align = align_term(pos, neg, cfg.lambda_) if k_neg > 0 else pos
        w = idf.idf(term)
        total += w * align
        if explain:
            per_term.append(TermScore(term, w, pos, neg, align))
    return ScoreBreakdown(total, per_term)
