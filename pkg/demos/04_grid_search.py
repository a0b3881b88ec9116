"""
Tuning K+, K- and lambda
========================

A three-question development set where the top alignment ties between
the two answers. Plain one-to-one scoring cannot separate them; either a
second positive alignment or a negative one can, and the tie rule picks
the lexicographically smallest winning cell.
"""

# %%
import numpy as np

from alignqa import EmbeddingTable, TermList, compute_idf
from alignqa.datasets import Candidate, QAInstance
from alignqa.tuner import PipelineContext, grid_search, parse_grid

table = EmbeddingTable.from_dict({
    "book": [1.0, 0.0, 0.0], "file": [0.8, 0.6, 0.0],
    "case": [0.3, 0.0, np.sqrt(0.91)], "shelf": [0.5, 0.5, 0.7],
})


def instance(qid, q, answers, gold):
    cands = [Candidate(str(i), " ".join(a), TermList(tuple(a))) for i, a in enumerate(answers)]
    return QAInstance(qid, " ".join(q), TermList(tuple(q)), cands, frozenset({gold}))


dev = [
    instance("q1", ["book"], [["book", "case"], ["book", "file"]], "1"),
    instance("q2", ["book"], [["case", "book"], ["file", "book"]], "1"),
    instance("q3", ["shelf"], [["shelf"], ["case"]], "0"),
]
# filler questions; with df = N/2 a term's IDF is exactly 0
idf = compute_idf([d.question_terms for d in dev] + [TermList(("x",)), TermList(("y",))])

# %%
grid = parse_grid("""
k_pos = 1, 2, 3
k_neg = 0, 1
lambda = 0.2, 0.4
metric = p1
""")
result = grid_search(dev, grid, PipelineContext(idf, table))
print(result.to_csv())
print("best:", result.best, "P@1 =", result.score)
