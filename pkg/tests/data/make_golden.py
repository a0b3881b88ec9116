"""Regenerate golden_direct_run.tsv from the brute-force oracle.

Run from this directory: ``python make_golden.py``. Config: K+=2, K-=1,
lambda=0.4, full variant, shipped lexicons.
"""

import sys
from pathlib import Path

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE.parent))

import oracle  # noqa: E402
from alignqa.text_prep import Lexicons, tokenize  # noqa: E402


def main():
    lex = Lexicons.default()
    vectors = {}
    for line in (HERE / "toy_vectors.txt").read_text().splitlines():
        w, *vals = line.split(" ")
        vectors[w] = [float(v) for v in vals]
    questions = {}
    for line in (HERE / "toy_wikiqa.tsv").read_text().splitlines():
        qid, q, sid, s, _ = line.split("\t")
        questions.setdefault(qid, (tokenize(q, lex).terms, []))[1].append((sid, tokenize(s, lex).terms))
    q_sets = [set(q) for q, _ in questions.values()]
    lines = []
    for qid, (q, cands) in questions.items():
        scored = [(sid, oracle.score(q, a, vectors, lambda t: oracle.local_idf(q_sets, t), "full", 2, 1, 0.4))
                  for sid, a in cands]
        for rank, (sid, s) in enumerate(oracle.rank(scored), 1):
            lines.append(f"{qid}\t{sid}\t{rank}\t{s:.6f}\n")
    (HERE / "golden_direct_run.tsv").write_text("".join(lines))


if __name__ == "__main__":
    main()
