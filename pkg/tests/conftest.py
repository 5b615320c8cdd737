import numpy as np
import pytest

from neuralgas import DissimilarityMatrix

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {name}: {detail}")


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion for the run summary."""

    def record(number, name, passed, detail=""):
        _ACCEPTANCE.append((number, name, bool(passed), detail))
        return passed

    return record


def block_matrix(intra=1.0, inter=100.0, sizes=(2, 2, 2)):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    entries = np.where(labels[:, None] == labels[None, :], intra, inter).astype(float)
    np.fill_diagonal(entries, 0.0)
    return DissimilarityMatrix(entries), labels


@pytest.fixture
def three_blocks():
    """Blocks {0,1}, {2,3}, {4,5}; intra-distance 1, inter-distance 100."""
    return block_matrix()
