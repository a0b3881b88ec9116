"""BM25 inverted index: baseline ranking, justification retrieval, AI2-style IR solver."""

from __future__ import annotations

import hashlib
import json
import math
import struct
import zlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .text_prep import TermList

INDEX_MAGIC = b"ALQIDX\x00"
INDEX_VERSION = 1
IDF_VARIANTS = ("plus_one", "robertson")


class IndexFormatError(ValueError):
    pass


class StaleIndexError(ValueError):
    pass


@dataclass(frozen=True)
class KbDocument:
    doc_id: str
    terms: TermList
    raw_text: str = ""


def doc_sort_key(doc_id: str):
    """Numeric ids order numerically and before any non-numeric id."""
    return (0, int(doc_id), "") if doc_id.isdigit() else (1, 0, doc_id)


def corpus_checksum(docs: Iterable[KbDocument]) -> str:
    h = hashlib.sha256()
    for d in docs:
        h.update(d.doc_id.encode("utf-8"))
        h.update(b"\x1f")
        h.update(d.raw_text.encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()


@dataclass
class InvertedIndex:
    postings: dict[str, list[tuple[str, int]]]
    doc_len: dict[str, int]
    doc_terms: dict[str, tuple[str, ...]]
    doc_text: dict[str, str]
    k1: float = 1.2
    b: float = 0.75
    idf_variant: str = "plus_one"
    checksum: str = ""
    avg_doc_len: float = field(init=False)

    def __post_init__(self):
        if self.idf_variant not in IDF_VARIANTS:
            raise ValueError(f"unknown BM25 idf variant {self.idf_variant!r}")
        self.avg_doc_len = sum(self.doc_len.values()) / len(self.doc_len) if self.doc_len else 0.0

    @property
    def n_docs(self) -> int:
        return len(self.doc_len)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        """BM25's own corpus IDF. Never mix with the question-set IDF used for alignment."""
        df = self.df(term)
        ratio = (self.n_docs - df + 0.5) / (df + 0.5)
        return math.log(ratio + 1.0) if self.idf_variant == "plus_one" else math.log(ratio)

    def document(self, doc_id: str) -> KbDocument:
        return KbDocument(doc_id, TermList(self.doc_terms[doc_id], self.doc_text[doc_id]), self.doc_text[doc_id])

    def term_score(self, tf: int, doc_id: str, idf: float) -> float:
        norm = self.k1 * (1.0 - self.b + self.b * self.doc_len[doc_id] / self.avg_doc_len) if self.avg_doc_len else self.k1
        return idf * tf * (self.k1 + 1.0) / (tf + norm)

    def score_all(self, query: Sequence[str]) -> dict[str, float]:
        """BM25 score of every document sharing at least one query term.

        Repeated query terms are summed once per occurrence.
        """
        scores: dict[str, float] = {}
        for term in query:
            plist = self.postings.get(term)
            if not plist:
                continue
            idf = self.idf(term)
            for doc_id, tf in plist:
                scores[doc_id] = scores.get(doc_id, 0.0) + self.term_score(tf, doc_id, idf)
        return scores


def build_index(docs: Sequence[KbDocument], k1: float = 1.2, b: float = 0.75,
                idf_variant: str = "plus_one") -> InvertedIndex:
    if not docs:
        raise ValueError("empty corpus")
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_len, doc_terms, doc_text = {}, {}, {}
    for doc in docs:
        if doc.doc_id in doc_len:
            raise ValueError(f"duplicate doc_id {doc.doc_id!r}")
        terms = tuple(doc.terms)
        doc_len[doc.doc_id] = len(terms)
        doc_terms[doc.doc_id] = terms
        doc_text[doc.doc_id] = doc.raw_text
        for term, tf in Counter(terms).items():
            postings.setdefault(term, []).append((doc.doc_id, tf))
    return InvertedIndex(postings, doc_len, doc_terms, doc_text, k1, b, idf_variant, corpus_checksum(docs))


@dataclass(frozen=True)
class RetrievalResult:
    hits: tuple[tuple[str, float], ...]

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.hits]

    def __len__(self):
        return len(self.hits)


def bm25_retrieve(query: TermList | Sequence[str], index: InvertedIndex, n: int) -> RetrievalResult:
    """Top-``n`` documents by BM25, ties broken by ascending doc id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    scores = index.score_all(list(query))
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], doc_sort_key(kv[0])))
    return RetrievalResult(tuple(ranked[:n]))


def bm25_rank_candidates(question: TermList, candidates: Sequence[TermList], k1: float = 1.2, b: float = 0.75,
                         idf_variant: str = "plus_one") -> list[tuple[int, float]]:
    """Rank candidates by BM25 against the question, indexing the candidates themselves.

    Returns ``(candidate_position, score)`` pairs, best first; equal
    scores keep input order.
    """
    if not candidates:
        raise ValueError("no candidates")
    docs = [KbDocument(str(i), c, c.source_text) for i, c in enumerate(candidates)]
    index = build_index(docs, k1, b, idf_variant)
    scores = index.score_all(list(question))
    out = [(i, scores.get(str(i), 0.0)) for i in range(len(candidates))]
    return sorted(out, key=lambda p: (-p[1], p[0]))


def ai2_ir_score(question: TermList, choice: TermList, index: InvertedIndex, n: int) -> float:
    """Best BM25 score among retrieved documents mentioning both question and choice.

    A hit survives only if it contains at least one question term and at
    least one choice term; 0 when nothing survives.
    """
    query = list(dict.fromkeys(tuple(question) + tuple(choice)))
    q_set, c_set = set(question), set(choice)
    for doc_id, score in bm25_retrieve(query, index, n).hits:
        terms = set(index.doc_terms[doc_id])
        if terms & q_set and terms & c_set:
            return score
    return 0.0


def _payload(index: InvertedIndex) -> bytes:
    body = {
        "k1": index.k1,
        "b": index.b,
        "idf_variant": index.idf_variant,
        "checksum": index.checksum,
        "docs": [[d, list(index.doc_terms[d]), index.doc_text[d]] for d in index.doc_len],
    }
    return json.dumps(body, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Write magic, version, corpus checksum, then zlib-compressed JSON."""
    data = zlib.compress(_payload(index), 6)
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(struct.pack("<H", INDEX_VERSION))
        fh.write(index.checksum.encode("ascii").ljust(64, b"\0"))
        fh.write(data)


def load_index(path: str | Path, expected_checksum: str | None = None) -> InvertedIndex:
    raw = Path(path).read_bytes()
    if not raw.startswith(INDEX_MAGIC):
        raise IndexFormatError(f"{path}: not an index file")
    off = len(INDEX_MAGIC)
    (version,) = struct.unpack_from("<H", raw, off)
    if version != INDEX_VERSION:
        raise IndexFormatError(f"{path}: unsupported index version {version}")
    off += 2
    checksum = raw[off : off + 64].rstrip(b"\0").decode("ascii")
    if expected_checksum is not None and checksum != expected_checksum:
        raise StaleIndexError(f"{path}: index was built from a different corpus")
    body = json.loads(zlib.decompress(raw[off + 64 :]))
    docs = [KbDocument(d, TermList(tuple(terms), text), text) for d, terms, text in body["docs"]]
    index = build_index(docs, body["k1"], body["b"], body["idf_variant"])
    index.checksum = body["checksum"]
    return index
