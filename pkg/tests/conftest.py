import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fxcluster.metrics import DistanceMatrix  # noqa: E402


def random_matrix(rng, n, scale=1.0):
    a = rng.uniform(0, scale, (n, n))
    d = np.triu(a, 1)
    return d + d.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def worked_matrix():
    """d(A,B)=1, d(A,C)=2, d(B,C)=3."""
    return DistanceMatrix(("A", "B", "C"), np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float))


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="rates.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    return _write


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
