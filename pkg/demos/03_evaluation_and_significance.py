"""
MAP, P@1 and a paired bootstrap
===============================

Ranks the bundled WikiQA-format fixture with the full model and the
one-to-one baseline, then asks whether the difference is significant.
"""

# %%
from pathlib import Path

from alignqa import AlignmentConfig, bootstrap_significance, compute_idf, evaluate, rank_direct
from alignqa.datasets import load_wikiqa
from alignqa.embeddings import load_embeddings
from alignqa.evaluation import paired_scores
from alignqa.pipelines import format_run, rank_bm25, run_all

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
instances = load_wikiqa(DATA / "toy_wikiqa.tsv")
table = load_embeddings(DATA / "toy_vectors.txt").table
idf = compute_idf([i.question_terms for i in instances])
gold = {i.question_id: i.gold for i in instances}

# %%
systems = {
    "full": run_all(instances, lambda i: rank_direct(i, idf, table, AlignmentConfig(5, 1, 0.4))),
    "one_to_one": run_all(instances, lambda i: rank_direct(i, idf, table, AlignmentConfig(variant="one_to_one"))),
    "bm25": run_all(instances, rank_bm25),
}
print(format_run(systems["full"]))

# %%
# Q4 has no correct sentence, so MAP skips it.
reports = {name: evaluate(runs, gold, "map") for name, runs in systems.items()}
for name, rep in reports.items():
    print(name, rep.to_dict())

# %%
# One-tailed: how often does a resample fail to show full > one_to_one?
_, a, b = paired_scores(reports["full"], reports["one_to_one"])
print("p =", bootstrap_significance(a, b, iterations=10_000, seed=2018))
