"""Tokenization, stopword/lemma lexicons and the local question-set IDF."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

_SPLIT = re.compile(r"[^0-9a-z]+")


def _read_data(name: str) -> str:
    return resources.files("alignqa").joinpath("data", name).read_text(encoding="utf-8")


def parse_stoplist(text: str) -> frozenset[str]:
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


def parse_lemma_map(text: str) -> dict[str, str]:
    lemma_map = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise ValueError(f"lemma map line {lineno}: expected 'inflected<TAB>lemma'")
        lemma_map[parts[0].strip().lower()] = parts[1].strip().lower()
    return lemma_map


@dataclass(frozen=True)
class Lexicons:
    """Stopword set plus inflected-form -> lemma table.

    Lookups through :meth:`lemma` fall back to the form itself, so the
    map never has to be complete.
    """

    stopwords: frozenset[str] = frozenset()
    lemma_map: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "stopwords", frozenset(w.lower() for w in self.stopwords))

    def lemma(self, form: str) -> str:
        return self.lemma_map.get(form, form)

    @classmethod
    def default(cls) -> "Lexicons":
        """English stoplist and lemma table shipped with the package."""
        global _DEFAULT
        if _DEFAULT is None:
            _DEFAULT = cls(
                parse_stoplist(_read_data("stopwords.txt")),
                parse_lemma_map(_read_data("lemmas.tsv")),
            )
        return _DEFAULT

    @classmethod
    def from_files(cls, stoplist: str | Path | None = None, lemmas: str | Path | None = None) -> "Lexicons":
        """Load lexicons from disk; ``None`` means use the shipped file."""
        stop_text = Path(stoplist).read_text(encoding="utf-8") if stoplist else _read_data("stopwords.txt")
        lemma_text = Path(lemmas).read_text(encoding="utf-8") if lemmas else _read_data("lemmas.tsv")
        return cls(parse_stoplist(stop_text), parse_lemma_map(lemma_text))


_DEFAULT: Lexicons | None = None


@dataclass(frozen=True)
class TermList:
    terms: tuple[str, ...]
    source_text: str = ""

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "TermList") -> "TermList":
        sep = " " if self.source_text and other.source_text else ""
        return TermList(self.terms + other.terms, self.source_text + sep + other.source_text)


def tokenize(raw: str, lexicons: Lexicons | None = None) -> TermList:
    """Lowercase, split on runs of non-alphanumerics, drop stopwords, lemmatize.

    >>> lex = Lexicons(frozenset({"can", "you", "a", "in", "the"}))
    >>> tokenize("Can you read a book in the dark?", lex).terms
    ('read', 'book', 'dark')
    """
    if lexicons is None:
        lexicons = Lexicons.default()
    stop = lexicons.stopwords
    terms = tuple(lexicons.lemma(tok) for tok in _SPLIT.split(raw.lower()) if tok and tok not in stop)
    return TermList(terms, raw)


def idf_value(n_questions: int, doc_freq: int) -> float:
    return math.log((n_questions - doc_freq + 0.5) / (doc_freq + 0.5))


@dataclass(frozen=True)
class IdfTable:
    """Local IDF computed over a question set.

    Terms that never occur in a question are answered with docfreq 0.
    Values go negative once a term appears in more than half the
    questions; ``clamp`` floors them at zero instead.
    """

    n_questions: int
    doc_freq: Mapping[str, int]
    clamp: bool = False

    def df(self, term: str) -> int:
        return self.doc_freq.get(term, 0)

    def idf(self, term: str) -> float:
        value = idf_value(self.n_questions, self.df(term))
        return max(value, 0.0) if self.clamp else value

    def __getitem__(self, term: str) -> float:
        return self.idf(term)

    def scaled(self, factor: float) -> "ScaledIdf":
        return ScaledIdf(self, factor)


@dataclass(frozen=True)
class ScaledIdf:
    """IDF lookup multiplied by a constant (used for ranking-invariance checks)."""

    base: IdfTable
    factor: float

    def idf(self, term: str) -> float:
        return self.factor * self.base.idf(term)


def compute_idf(questions: Iterable[TermList], clamp: bool = False) -> IdfTable:
    doc_freq: dict[str, int] = {}
    n = 0
    for question in questions:
        n += 1
        for term in set(question.terms):
            doc_freq[term] = doc_freq.get(term, 0) + 1
    if n == 0:
        raise ValueError("no questions")
    return IdfTable(n, doc_freq, clamp)
