"""Loaders for WikiQA TSV, the multiple-choice JSONL bridge format and KB corpora.

All readers stream their input and accept ``.gz`` files.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .ir_engine import KbDocument
from .text_prep import Lexicons, TermList, tokenize

FORMATS = ("wikiqa_tsv", "mc_jsonl", "kb_lines")


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    text: str
    terms: TermList


@dataclass
class QAInstance:
    question_id: str
    question: str
    question_terms: TermList
    candidates: list[Candidate]
    gold: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        ids = [c.candidate_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError(f"{self.question_id}: duplicate candidate ids")
        if not self.gold <= set(ids):
            raise ValueError(f"{self.question_id}: gold ids not among candidates")


def _open(path: str | Path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def iter_wikiqa(path, lexicons: Lexicons | None = None) -> Iterator[QAInstance]:
    """Yield one instance per question of a WikiQA TSV split.

    Columns: QuestionID, Question, [DocumentID, DocumentTitle,] SentenceID,
    Sentence, Label. Both the 5-column and the official 7-column layout
    are accepted; a header row starting with ``QuestionID`` is skipped.
    Rows are grouped by consecutive question id.
    """
    current = None
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            cols = line.split("\t")
            if lineno == 1 and cols[0] == "QuestionID":
                continue
            if len(cols) == 7:
                qid, question, _, _, sid, sentence, label = cols
            elif len(cols) == 5:
                qid, question, sid, sentence, label = cols
            else:
                raise DatasetFormatError(f"{path}:{lineno}: expected 5 or 7 tab-separated columns, got {len(cols)}")
            if label not in ("0", "1"):
                raise DatasetFormatError(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
            if current is None or current[0] != qid:
                if current is not None:
                    yield _finish(current)
                current = (qid, question, tokenize(question, lexicons), [], set())
            cand = Candidate(sid, sentence, tokenize(sentence, lexicons))
            if any(c.candidate_id == sid for c in current[3]):
                raise DatasetFormatError(f"{path}:{lineno}: duplicate sentence id {sid!r}")
            current[3].append(cand)
            if label == "1":
                current[4].add(sid)
    if current is not None:
        yield _finish(current)


def _finish(state) -> QAInstance:
    qid, question, terms, cands, gold = state
    return QAInstance(qid, question, terms, cands, frozenset(gold))


def load_wikiqa(path, lexicons: Lexicons | None = None) -> list[QAInstance]:
    return list(iter_wikiqa(path, lexicons))


def iter_mc_jsonl(path, lexicons: Lexicons | None = None) -> Iterator[QAInstance]:
    """Multiple-choice bridge format: ``{"id", "question", "candidates", "gold_index"}``.

    Candidate ids are the stringified positions ``"0"``, ``"1"``, ...
    """
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                qid, question, texts = str(rec["id"]), rec["question"], rec["candidates"]
                gold_index = rec["gold_index"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DatasetFormatError(f"{path}:{lineno}: malformed record ({exc})") from None
            if not isinstance(texts, list) or not texts:
                raise DatasetFormatError(f"{path}:{lineno}: candidates must be a non-empty list")
            if not isinstance(gold_index, int) or not 0 <= gold_index < len(texts):
                raise DatasetFormatError(f"{path}:{lineno}: gold_index {gold_index!r} out of range for {len(texts)} candidates")
            cands = [Candidate(str(i), t, tokenize(t, lexicons)) for i, t in enumerate(texts)]
            yield QAInstance(qid, question, tokenize(question, lexicons), cands, frozenset({str(gold_index)}))


def load_mc_jsonl(path, lexicons: Lexicons | None = None) -> list[QAInstance]:
    return list(iter_mc_jsonl(path, lexicons))


def iter_kb(path, lexicons: Lexicons | None = None) -> Iterator[KbDocument]:
    """One document per line, or JSONL objects with ``text`` and optional ``id``.

    Lines that parse as JSON objects with a ``text`` key are read as
    records; anything else is plain text. Blank lines are skipped and
    do not consume an id.
    """
    seq = 0
    with _open(path) as fh:
        for line in fh:
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            doc_id, text = None, line
            if line.lstrip().startswith("{"):
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    rec = None
                if isinstance(rec, dict) and "text" in rec:
                    text = rec["text"]
                    doc_id = str(rec["id"]) if rec.get("id") is not None else None
            if doc_id is None:
                doc_id = str(seq)
            seq += 1
            yield KbDocument(doc_id, tokenize(text, lexicons), text)


def load_kb(path, lexicons: Lexicons | None = None) -> list[KbDocument]:
    return list(iter_kb(path, lexicons))


def load_dataset(path, fmt: str, lexicons: Lexicons | None = None) -> list[QAInstance]:
    if fmt == "wikiqa_tsv":
        return load_wikiqa(path, lexicons)
    if fmt == "mc_jsonl":
        return load_mc_jsonl(path, lexicons)
    raise ValueError(f"unknown dataset format {fmt!r}")


def convert_yahoo(questions, out_path, min_candidates: int = 4) -> int:
    """Write Yahoo! Answers-style data to the multiple-choice JSONL format.

    ``questions`` yields ``(qid, question, answers, best_index)``. The
    corpus itself is not redistributable, so this only reshapes records
    already on disk. Questions with fewer than ``min_candidates`` answers
    are dropped; returns the number written.
    """
    n = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for qid, question, answers, best in questions:
            if len(answers) < min_candidates:
                continue
            fh.write(json.dumps({"id": qid, "question": question, "candidates": list(answers), "gold_index": best}) + "\n")
            n += 1
    return n
