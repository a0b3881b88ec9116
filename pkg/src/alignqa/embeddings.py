"""Pretrained word vectors and per-question-term similarity rankings."""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .text_prep import TermList

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"ALQEMB\x00\x01"


class EmbeddingFormatError(ValueError):
    pass


class EmbeddingTable:
    """Immutable vocabulary -> vector map with cached Euclidean norms.

    Vectors are stored unnormalized; cosine divides by the cached norms.
    """

    def __init__(self, words: Sequence[str], matrix: np.ndarray):
        matrix = np.asarray(matrix).view()
        if matrix.ndim != 2 or matrix.shape[0] != len(words):
            raise ValueError("matrix must have one row per word")
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words")
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.norms = np.linalg.norm(matrix.astype(np.float64, copy=False), axis=1)
        if np.any(self.norms == 0):
            raise ValueError("zero-norm vector")
        self.norms.setflags(write=False)

    @classmethod
    def from_dict(cls, vectors: Mapping[str, Sequence[float]], dtype=np.float64) -> "EmbeddingTable":
        words = list(vectors)
        if not words:
            return cls([], np.zeros((0, 0), dtype=dtype))
        return cls(words, np.array([vectors[w] for w in words], dtype=dtype))

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, term):
        return term in self.index

    def vector(self, term: str) -> np.ndarray | None:
        i = self.index.get(term)
        return None if i is None else self.matrix[i]

    def scaled(self, factors: Mapping[str, float]) -> "EmbeddingTable":
        """Copy with selected vectors multiplied by positive factors."""
        m = self.matrix.astype(np.float64, copy=True)
        for term, c in factors.items():
            m[self.index[term]] *= c
        return EmbeddingTable(self.words, m)

    def similarity_matrix(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Cosine similarity between table rows ``rows`` and ``cols``."""
        a = self.matrix[rows].astype(np.float64, copy=False)
        b = self.matrix[cols].astype(np.float64, copy=False)
        sims = (a @ b.T) / np.outer(self.norms[rows], self.norms[cols])
        return np.clip(sims, -1.0, 1.0)


@dataclass
class LoadReport:
    table: EmbeddingTable
    skipped_zero: int
    skipped_duplicate: int


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        path = Path(source)
        raw = gzip.open(path, "rb") if path.suffix == ".gz" else open(path, "rb")
    else:
        raw = source
    return io.TextIOWrapper(raw, encoding="utf-8", errors="replace")


def load_embeddings(source, expected_dim: int | None = None, dtype=np.float32) -> LoadReport:
    """Parse a GloVe-style text file (``word v1 ... vd`` per line).

    ``source`` is a path (``.gz`` decompressed transparently) or a binary
    stream. A leading ``count dim`` header line is skipped. Dimension
    comes from the first row unless given. Duplicate words keep their
    first occurrence; zero vectors are skipped and counted.
    """
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim = expected_dim
    zero = dup = 0
    with _open_text(source) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            word, _, rest = line.partition(" ")
            if lineno == 1 and word.isdigit() and rest.strip().isdigit():
                continue  # word2vec-style "count dim" header
            try:
                vec = np.array(rest.split(" "), dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"line {lineno}: unparseable vector") from None
            if dim is None:
                dim = vec.shape[0]
            if vec.shape[0] != dim:
                raise EmbeddingFormatError(
                    f"line {lineno}: expected {dim} components, got {vec.shape[0]}"
                )
            if word in seen:
                dup += 1
                continue
            if not np.any(vec):
                zero += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if zero:
        logger.warning("skipped %d zero-norm vectors", zero)
    matrix = np.array(rows, dtype=dtype) if rows else np.zeros((0, dim or 0), dtype=dtype)
    return LoadReport(EmbeddingTable(words, matrix), zero, dup)


def file_checksum(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def save_cache(table: EmbeddingTable, path: str | Path, source_checksum: str) -> None:
    """Binary cache: magic, header length, JSON header, vocab block, raw matrix."""
    vocab = "\n".join(table.words).encode("utf-8")
    matrix = np.ascontiguousarray(table.matrix)
    header = json.dumps(
        {
            "checksum": source_checksum,
            "dtype": matrix.dtype.str,
            "n": len(table),
            "dim": table.dim,
            "vocab_bytes": len(vocab),
        },
        sort_keys=True,
    ).encode("ascii")
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(vocab)
        fh.write(matrix.tobytes())


def load_cache(path: str | Path, source_checksum: str | None = None) -> EmbeddingTable | None:
    """Return the cached table, or ``None`` if the cache is missing or stale."""
    path = Path(path)
    if not path.exists():
        return None
    data = path.read_bytes()
    if not data.startswith(CACHE_MAGIC):
        return None
    off = len(CACHE_MAGIC)
    (hlen,) = struct.unpack_from("<I", data, off)
    off += 4
    header = json.loads(data[off : off + hlen])
    off += hlen
    if source_checksum is not None and header["checksum"] != source_checksum:
        return None
    vocab = data[off : off + header["vocab_bytes"]].decode("utf-8")
    off += header["vocab_bytes"]
    words = vocab.split("\n") if header["n"] else []
    matrix = np.frombuffer(data, dtype=np.dtype(header["dtype"]), offset=off)
    matrix = matrix.reshape(header["n"], header["dim"]).copy()
    return EmbeddingTable(words, matrix)


def load_with_cache(path: str | Path, cache_path: str | Path | None = None, expected_dim: int | None = None) -> EmbeddingTable:
    if cache_path is None:
        return load_embeddings(path, expected_dim).table
    checksum = file_checksum(path)
    table = load_cache(cache_path, checksum)
    if table is None:
        table = load_embeddings(path, expected_dim).table
        save_cache(table, cache_path, checksum)
    return table


def cosine(a: str, b: str, table: EmbeddingTable) -> float | None:
    ia, ib = table.index.get(a), table.index.get(b)
    if ia is None or ib is None:
        return None
    va = table.matrix[ia].astype(np.float64, copy=False)
    vb = table.matrix[ib].astype(np.float64, copy=False)
    sim = float(np.dot(va, vb) / (table.norms[ia] * table.norms[ib]))
    return min(1.0, max(-1.0, sim))


@dataclass(frozen=True)
class RankedSimilarities:
    """Answer-term occurrences ordered by similarity, best first.

    Equal similarities keep answer order (earlier position first).
    """

    pairs: tuple[tuple[str, float], ...]

    @property
    def sims(self) -> list[float]:
        return [s for _, s in self.pairs]

    def __len__(self):
        return len(self.pairs)


def _descending(sims: np.ndarray) -> np.ndarray:
    return np.argsort(-sims, kind="stable")


def rank_alignments(q_term: str, answer: TermList | Iterable[str], table: EmbeddingTable) -> RankedSimilarities:
    qi = table.index.get(q_term)
    if qi is None:
        return RankedSimilarities(())
    present = [t for t in answer if t in table.index]
    if not present:
        return RankedSimilarities(())
    sims = table.similarity_matrix([qi], [table.index[t] for t in present])[0]
    order = _descending(sims)
    return RankedSimilarities(tuple((present[j], float(sims[j])) for j in order))


def ranked_rows(question: Sequence[str], answer: Sequence[str], table: EmbeddingTable) -> list[np.ndarray]:
    """Descending similarity rows for every question position in one matrix product.

    Out-of-vocabulary question terms get an empty row.
    """
    cols = [table.index[t] for t in answer if t in table.index]
    empty = np.zeros(0)
    q_idx = [table.index.get(t) for t in question]
    known = [i for i in q_idx if i is not None]
    if not cols or not known:
        return [empty for _ in question]
    sims = table.similarity_matrix(known, cols)
    sims = np.take_along_axis(sims, np.argsort(-sims, axis=1, kind="stable"), axis=1)
    rows, r = [], 0
    for i in q_idx:
        if i is None:
            rows.append(empty)
        else:
            rows.append(sims[r])
            r += 1
    return rows
