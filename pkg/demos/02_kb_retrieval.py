"""
Multiple choice backed by a knowledge base
==========================================

Each answer choice is turned into a BM25 query (question + choice), the
top-N retrieved sentences are scored by alignment against that query, and
the choice score is the sum.
"""

# %%
from pathlib import Path

from alignqa import AlignmentConfig, ai2_ir_score, bm25_retrieve, build_index, compute_idf, rank_kb
from alignqa.datasets import load_kb, load_mc_jsonl
from alignqa.embeddings import load_embeddings

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
docs = load_kb(DATA / "toy_kb.txt")
index = build_index(docs)  # k1=1.2, b=0.75
print(index.n_docs, "documents, avg length", round(index.avg_doc_len, 2))

# %%
questions = load_mc_jsonl(DATA / "toy_mc.jsonl")
table = load_embeddings(DATA / "toy_vectors.txt").table
idf = compute_idf([q.question_terms for q in questions])
q = questions[2]
print(q.question, [c.text for c in q.candidates])

# %%
# What BM25 brings back for each choice.
for c in q.candidates:
    hits = bm25_retrieve(q.question_terms + c.terms, index, 3).hits
    print(c.text, [(index.doc_text[d][:40], round(s, 3)) for d, s in hits])

# %%
# Alignment over the retrieved justifications, for two values of N.
for n in (1, 5):
    ranked = rank_kb(q, index, idf, table, AlignmentConfig(1, 1, 0.4, n_justifications=n))
    print(f"N={n}", [(q.candidates[int(c)].text, round(s, 3)) for c, s in ranked.entries])

# %%
# The IR-solver baseline: best hit that mentions both question and choice.
print([(c.text, round(ai2_ir_score(q.question_terms, c.terms, index, 5), 3)) for c in q.candidates])
