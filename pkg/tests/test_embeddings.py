import io
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracle
from alignqa.embeddings import (
    EmbeddingFormatError, EmbeddingTable, cosine, file_checksum, load_cache, load_embeddings,
    load_with_cache, rank_alignments,
)


def stream(text):
    return io.BytesIO(text.encode("utf-8"))


def test_load_two_rows():
    rep = load_embeddings(stream("cat 0.1 0.2 0.3\ndog 0.3 0.2 0.1\n"))
    assert len(rep.table) == 2
    assert rep.table.dim == 3


def test_word2vec_header_skipped():
    rep = load_embeddings(stream("2 3\ncat 0.1 0.2 0.3\ndog 0.3 0.2 0.1\n"))
    assert rep.table.words == ["cat", "dog"]
    assert rep.table.dim == 3


def test_dimension_mismatch_names_line():
    with pytest.raises(EmbeddingFormatError, match="line 2"):
        load_embeddings(stream("dog 0.1 0.2 0.3\ncat 0.1 0.2\n"))


def test_expected_dim_enforced():
    with pytest.raises(EmbeddingFormatError, match="line 1"):
        load_embeddings(stream("dog 0.1 0.2 0.3\n"), expected_dim=4)


def test_zero_rows_skipped_and_duplicates_keep_first():
    rep = load_embeddings(stream("a 1 0\nz 0 0\na 0 1\nb 0 2\n"))
    assert rep.skipped_zero == 1
    assert rep.skipped_duplicate == 1
    assert rep.table.words == ["a", "b"]
    assert list(rep.table.vector("a")) == [1.0, 0.0]
    assert rep.table.norms[1] == pytest.approx(2.0)


def test_gzip_path(tmp_path):
    import gzip
    p = tmp_path / "v.txt.gz"
    with gzip.open(p, "wt") as fh:
        fh.write("a 1 2\nb 3 4\n")
    assert len(load_embeddings(p).table) == 2


def test_cosine_examples():
    t = EmbeddingTable.from_dict({"x": [1, 0], "y": [0, 1], "z": [1, 1]})
    assert cosine("x", "x", t) == pytest.approx(1.0, abs=1e-9)
    assert cosine("x", "y", t) == 0.0
    assert cosine("z", "x", t) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert cosine("z", "x", t) == pytest.approx(0.70711, abs=1e-5)
    assert cosine("x", "oov", t) is None


def test_rank_alignments_figure_example():
    t = EmbeddingTable.from_dict({"book": [1.0, 0.0], "files": [0.3, math.sqrt(1 - 0.09)]})
    r = rank_alignments("book", ["book", "files"], t)
    assert [w for w, _ in r.pairs] == ["book", "files"]
    assert r.sims == pytest.approx([1.0, 0.3], abs=1e-12)
    assert rank_alignments("book", [], t).pairs == ()
    assert rank_alignments("nope", ["book"], t).pairs == ()


def test_rank_keeps_duplicates_and_breaks_ties_by_position():
    t = EmbeddingTable.from_dict({"q": [1, 0], "a": [1, 1], "b": [1, -1], "c": [0, 1]})
    r = rank_alignments("q", ["c", "b", "oov", "a", "b"], t)
    assert [w for w, _ in r.pairs] == ["b", "a", "b", "c"]


def random_table(draw_seed, vocab=10, dim=5):
    rng = np.random.default_rng(draw_seed)
    words = [f"w{i}" for i in range(vocab)]
    m = rng.normal(size=(vocab, dim))
    # occasional exact duplicates force ties
    if vocab > 2:
        m[1] = m[0] * 2.0
    return EmbeddingTable(words, m)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 10), st.integers(1, 5), st.data())
def test_rank_matches_brute_force(seed, vocab, dim, data):
    t = random_table(seed, vocab, dim)
    vecs = {w: list(t.matrix[i]) for i, w in enumerate(t.words)}
    pool = t.words + ["oov"]
    answer = data.draw(st.lists(st.sampled_from(pool), max_size=12))
    q = data.draw(st.sampled_from(pool))
    got = rank_alignments(q, answer, t).sims
    want = oracle.ranked(q, answer, vecs)
    assert got == pytest.approx(want, abs=1e-12)
    assert all(-1.0 <= s <= 1.0 for s in got)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_symmetry_and_scale_invariance(seed, c):
    t = random_table(seed, 6, 4)
    scaled = t.scaled({w: c * (i + 1) for i, w in enumerate(t.words)})
    answer = ["w2", "w3", "w0", "w5", "w4"]
    for a in t.words:
        for b in t.words:
            assert cosine(a, b, t) == pytest.approx(cosine(b, a, t), abs=1e-12)
            assert cosine(a, b, scaled) == pytest.approx(cosine(a, b, t), abs=1e-9)
    for q in ("w0", "w3"):
        r1 = rank_alignments(q, answer, t)
        r2 = rank_alignments(q, answer, scaled)
        assert r2.sims == pytest.approx(r1.sims, abs=1e-9)


def test_cache_roundtrip_and_invalidation(tmp_path):
    src = tmp_path / "v.txt"
    src.write_text("a 1 2 3\nb 4 5 6\n")
    cache = tmp_path / "v.cache"
    t1 = load_with_cache(src, cache)
    assert cache.exists()
    t2 = load_cache(cache, file_checksum(src))
    assert t2.words == t1.words
    assert np.array_equal(t2.matrix, t1.matrix)
    assert load_cache(cache, "different") is None
    src.write_text("a 1 2 3\nc 7 8 9\n")
    t3 = load_with_cache(src, cache)
    assert t3.words == ["a", "c"]


def test_cache_rejects_bad_magic(tmp_path):
    p = tmp_path / "junk"
    p.write_bytes(b"not a cache")
    assert load_cache(p) is None


def test_large_file_load(tmp_path):
    rng = np.random.default_rng(0)
    n, dim = 400_000, 4
    m = np.round(rng.normal(size=(n, dim)), 3)
    m[m == 0] = 0.5
    p = tmp_path / "big.txt"
    np.savetxt(p, m, fmt="%.3f", delimiter=" ")
    words = [f"w{i}" for i in range(n)]
    lines = p.read_text().splitlines()
    p.write_text("".join(f"{w} {line}\n" for w, line in zip(words, lines)))
    start = time.perf_counter()
    rep = load_embeddings(p)
    elapsed = time.perf_counter() - start
    assert len(rep.table) == n
    assert elapsed < 30.0
