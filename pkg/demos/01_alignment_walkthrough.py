"""
One-to-many alignment on a toy question
=======================================

Walks through scoring two candidate answers for "How do I store my book
collection?" with hand-made 4-d vectors, first term by term and then with
the three scoring variants.
"""

# %%
# Vectors are chosen so that "file" is close to "book" (cosine 0.8), "case"
# is only loosely related (0.3) and "unfettered" points away (-0.6).
import numpy as np

from alignqa import AlignmentConfig, EmbeddingTable, Lexicons, compute_idf, rank_alignments, score_answer, tokenize

table = EmbeddingTable.from_dict({
    "store": [0.2, 0.9, 0.1, 0.0],
    "book": [1.0, 0.0, 0.0, 0.0],
    "collection": [0.6, 0.6, 0.2, 0.1],
    "file": [0.8, 0.6, 0.0, 0.0],
    "shelf": [0.5, 0.5, 0.5, 0.5],
    "case": [0.3, 0.0, np.sqrt(0.91), 0.0],
    "unfettered": [-0.6, 0.0, 0.0, 0.8],
})

lex = Lexicons.default()
question = tokenize("How do I store my book collection?", lex)
correct = tokenize("Put each book in labeled files on a shelf.", lex)
wrong = tokenize("The book case was unfettered.", lex)
print(question.terms, correct.terms, wrong.terms)

# %%
# Local IDF comes from the question set itself. A few unrelated questions
# keep the weights positive.
others = [tokenize(t, lex) for t in ("Why is the sky blue?", "What do cats eat?", "Where is Paris?")]
idf = compute_idf([question, *others])
print({t: round(idf.idf(t), 4) for t in question.terms})

# %%
# For "book", every answer term ranked by cosine, best first.
for answer in (correct, wrong):
    print(rank_alignments("book", answer, table).pairs)

# %%
# Same question, three ways of turning rankings into a score.
configs = {
    "one_to_one": AlignmentConfig(variant="one_to_one"),
    "full K+=2 K-=1 lambda=0.4": AlignmentConfig(2, 1, 0.4),
    "one_to_all": AlignmentConfig(variant="one_to_all"),
}
for name, cfg in configs.items():
    s_correct = score_answer(question, correct, idf, table, cfg).total
    s_wrong = score_answer(question, wrong, idf, table, cfg).total
    print(f"{name:28s} correct={s_correct:.4f} wrong={s_wrong:.4f}")

# %%
# The per-term breakdown behind the full score.
for rec in score_answer(question, wrong, idf, table, AlignmentConfig(2, 1, 0.4), explain=True).per_term:
    print(rec)
