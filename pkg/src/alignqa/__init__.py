"""Unsupervised alignment + IR baseline for answer ranking."""

from .embeddings import EmbeddingTable, RankedSimilarities, cosine, load_embeddings, rank_alignments
from .evaluation import EvalReport, average_precision, bootstrap_significance, evaluate, precision_at_1
from .ir_engine import InvertedIndex, KbDocument, ai2_ir_score, bm25_rank_candidates, bm25_retrieve, build_index
from .pipelines import RankedList, rank_direct, rank_kb
from .scoring import AlignmentConfig, ScoreBreakdown, align_term, neg_score, pos_score, score_answer, score_one_to_all
from .text_prep import IdfTable, Lexicons, TermList, compute_idf, tokenize

__version__ = "0.1.0"

__all__ = [
    "AlignmentConfig",
    "EmbeddingTable",
    "EvalReport",
    "IdfTable",
    "InvertedIndex",
    "KbDocument",
    "Lexicons",
    "RankedList",
    "RankedSimilarities",
    "ScoreBreakdown",
    "TermList",
    "ai2_ir_score",
    "align_term",
    "average_precision",
    "bm25_rank_candidates",
    "bm25_retrieve",
    "bootstrap_significance",
    "build_index",
    "compute_idf",
    "cosine",
    "evaluate",
    "load_embeddings",
    "neg_score",
    "pos_score",
    "precision_at_1",
    "rank_alignments",
    "rank_direct",
    "rank_kb",
    "score_answer",
    "score_one_to_all",
    "tokenize",
]
