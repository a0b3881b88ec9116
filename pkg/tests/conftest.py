import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from alignqa.embeddings import EmbeddingTable, load_embeddings  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def toy_table():
    return load_embeddings(DATA / "toy_vectors.txt", dtype=np.float64).table


@pytest.fixture
def fig1_table():
    """book/file/case/unfettered vectors with cos(book, file)=0.8, cos(book, case)=0.3."""
    return EmbeddingTable.from_dict({
        "book": [1.0, 0.0, 0.0, 0.0],
        "file": [0.8, 0.6, 0.0, 0.0],
        "case": [0.3, 0.0, np.sqrt(1 - 0.09), 0.0],
        "unfettered": [-0.6, 0.0, 0.0, 0.8],
        "shelf": [0.5, 0.5, 0.5, 0.5],
    })


_ACCEPTANCE: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _ACCEPTANCE.setdefault(marker.args[0], []).append((marker.args[1], status))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        results = _ACCEPTANCE[n]
        statuses = {s for _, s in results}
        overall = "FAIL" if "FAIL" in statuses else "SKIP" if statuses == {"SKIP"} else "PASS"
        terminalreporter.write_line(f"criterion {n}: {overall}  ({results[0][0]}; {len(results)} check(s))")
