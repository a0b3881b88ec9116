import json
import subprocess
import sys
from pathlib import Path

import pytest

from alignqa.cli import main

CONFIGS = Path(__file__).parent.parent / "configs"


@pytest.fixture
def paths(data_dir, tmp_path):
    return {
        "wikiqa": str(data_dir / "toy_wikiqa.tsv"),
        "mc": str(data_dir / "toy_mc.jsonl"),
        "kb": str(data_dir / "toy_kb.txt"),
        "vec": str(data_dir / "toy_vectors.txt"),
        "golden": data_dir / "golden_direct_run.tsv",
        "tmp": tmp_path,
    }


def rank(paths, name, *extra, dataset=None):
    out = paths["tmp"] / name
    argv = ["rank", "--dataset", dataset or paths["wikiqa"], "--embeddings", paths["vec"], "--output", str(out), *extra]
    assert main(argv) == 0
    return out


def test_help_and_unknown_flag(capsys):
    assert main(["--help"]) == 0
    assert main(["rank", "--bogus"]) == 2
    r = subprocess.run([sys.executable, "-m", "alignqa", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "significance" in r.stdout


def test_rank_golden_file(paths):
    out = rank(paths, "run.tsv", "--k-pos", "2", "--k-neg", "1", "--lambda", "0.4")
    assert out.read_bytes() == paths["golden"].read_bytes()


def test_rank_via_config_file(paths):
    conf = paths["tmp"] / "c.conf"
    conf.write_text("k_pos = 2\nk_neg = 1\nlambda = 0.4\npipeline = direct\n")
    out = paths["tmp"] / "run.tsv"
    argv = ["--config", str(conf), "rank", "--dataset", paths["wikiqa"], "--embeddings", paths["vec"],
            "--output", str(out)]
    assert main(argv) == 0
    assert out.read_bytes() == paths["golden"].read_bytes()
    # command-line flag beats config
    assert main(argv + ["--k-pos", "1"]) == 0
    assert out.read_bytes() != paths["golden"].read_bytes()


def test_config_errors(paths):
    conf = paths["tmp"] / "bad.conf"
    conf.write_text("no_such_option = 3\n")
    assert main(["--config", str(conf), "eval", "--run", "x", "--gold", "y"]) == 2
    conf.write_text("variant = sideways\n")
    assert main(["--config", str(conf), "eval", "--run", "x", "--gold", "y"]) == 2


def test_shipped_configs_parse(paths):
    for conf in sorted(CONFIGS.glob("*.conf")):
        if conf.name.endswith("grid.conf"):
            continue
        assert main(["--config", str(conf), "eval", "--run", "missing", "--gold", "missing"]) == 2


def test_reduction_run_files_identical(paths):
    a = rank(paths, "a.tsv", "--variant", "one_to_one", "--k-pos", "4", "--k-neg", "2", "--lambda", "0.3")
    b = rank(paths, "b.tsv", "--k-pos", "1", "--k-neg", "0")
    assert a.read_bytes() == b.read_bytes()


def test_explain_one_record_per_candidate(paths):
    exp = paths["tmp"] / "explain.jsonl"
    rank(paths, "run.tsv", "--k-pos", "2", "--explain", str(exp))
    records = [json.loads(line) for line in exp.read_text().splitlines()]
    assert len(records) == 14
    assert {"question_id", "candidate_id", "total", "per_term"} <= set(records[0])


def test_rank_errors(paths):
    out = str(paths["tmp"] / "r.tsv")
    assert main(["rank", "--dataset", paths["wikiqa"], "--embeddings", "/nope.txt", "--output", out]) == 2
    assert main(["rank", "--dataset", paths["wikiqa"], "--output", out]) == 2
    assert main(["rank", "--dataset", paths["mc"], "--format", "mc_jsonl", "--embeddings", paths["vec"],
                 "--pipeline", "kb", "--output", out]) == 2
    assert main(["rank", "--dataset", paths["wikiqa"], "--embeddings", paths["vec"], "--k-pos", "0",
                 "--output", out]) == 2
    bad_vec = paths["tmp"] / "bad.txt"
    bad_vec.write_text("a 1 2\nb 1\n")
    assert main(["rank", "--dataset", paths["wikiqa"], "--embeddings", str(bad_vec), "--output", out]) == 2


def test_index_command(paths, capsys):
    out = paths["tmp"] / "kb.idx"
    assert main(["index", "--kb", paths["kb"], "--output", str(out)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["n_docs"] == 8
    first = out.read_bytes()
    assert main(["index", "--kb", paths["kb"], "--output", str(out)]) == 0
    assert out.read_bytes() == first
    assert main(["index", "--kb", "/missing/kb.txt", "--output", str(out)]) == 2


def test_kb_pipeline_with_index_matches_kb_file(paths):
    idx = paths["tmp"] / "kb.idx"
    assert main(["index", "--kb", paths["kb"], "--output", str(idx)]) == 0
    common = ["--format", "mc_jsonl", "--pipeline", "kb", "--k-pos", "1", "--k-neg", "1", "--lambda", "0.4"]
    a = rank(paths, "a.tsv", *common, "--kb", paths["kb"], dataset=paths["mc"])
    b = rank(paths, "b.tsv", *common, "--index", str(idx), dataset=paths["mc"])
    assert a.read_bytes() == b.read_bytes()
    c = rank(paths, "c.tsv", "--format", "mc_jsonl", "--pipeline", "ai2", "--kb", paths["kb"], dataset=paths["mc"])
    assert len(c.read_text().splitlines()) == 12


def test_eval_and_mismatch(paths, capsys):
    gold = paths["tmp"] / "gold.tsv"
    run = rank(paths, "run.tsv", "--k-pos", "2", "--gold-out", str(gold))
    capsys.readouterr()
    assert main(["eval", "--run", str(run), "--gold", str(gold)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["n_evaluated"] == 4 and rep["n_skipped"] == 1
    perfect = paths["tmp"] / "perfect.tsv"
    perfect.write_text("Q1\tS1-1\t1\t1.0\nQ1\tS1-0\t2\t0.5\n")
    pg = paths["tmp"] / "pg.tsv"
    pg.write_text("Q1\tS1-1\n")
    assert main(["eval", "--run", str(perfect), "--gold", str(pg)]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 1.0
    pg.write_text("Q1\tS1-1\nQ7\tS7-0\n")
    assert main(["eval", "--run", str(perfect), "--gold", str(pg)]) == 3
    assert "Q7" in capsys.readouterr().err


def test_significance_identical_runs(paths, capsys):
    gold = paths["tmp"] / "gold.tsv"
    run = rank(paths, "run.tsv", "--k-pos", "2", "--gold-out", str(gold))
    capsys.readouterr()
    assert main(["significance", "--run-a", str(run), "--run-b", str(run), "--gold", str(gold), "--seed", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["p_value"] == 1.0
    assert main(["significance", "--run-a", str(run), "--run-b", str(run), "--gold", str(gold)]) == 2


def test_tune_single_cell(paths, capsys):
    grid = paths["tmp"] / "g.conf"
    grid.write_text("k_pos = 3\nk_neg = 1\nlambda = 0.4\nn = 2\nmetric = p1\n")
    table = paths["tmp"] / "t.csv"
    argv = ["tune", "--dataset", paths["mc"], "--format", "mc_jsonl", "--embeddings", paths["vec"],
            "--kb", paths["kb"], "--grid", str(grid), "--table-out", str(table)]
    assert main(argv) == 0
    rep = json.loads(capsys.readouterr().out)
    assert (rep["k_pos"], rep["k_neg"], rep["lambda"], rep["n_justifications"], rep["cells"]) == (3, 1, 0.4, 2, 1)
    assert len(table.read_text().splitlines()) == 2


@pytest.mark.parametrize("threads", ["2", "4"])
def test_threads_do_not_change_output(paths, threads):
    one = rank(paths, "one.tsv", "--k-pos", "3", "--k-neg", "1", "--lambda", "0.4")
    many = rank(paths, "many.tsv", "--k-pos", "3", "--k-neg", "1", "--lambda", "0.4", "--threads", threads)
    assert one.read_bytes() == many.read_bytes()


def test_embedding_cache_flag(paths):
    cache = paths["tmp"] / "vec.cache"
    a = rank(paths, "a.tsv", "--k-pos", "2", "--cache", str(cache))
    assert cache.exists()
    b = rank(paths, "b.tsv", "--k-pos", "2", "--cache", str(cache))
    assert a.read_bytes() == b.read_bytes()
