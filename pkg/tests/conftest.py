import os
from pathlib import Path

import pytest

from poison_proof.dataset import load_mnist_idx
from poison_proof.toy import black_white

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
MNIST_DIR = Path(os.environ.get("MNIST_DIR", DATA / "mnist"))

# one PASS/FAIL line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def bw():
    return black_white()


def mnist_available() -> bool:
    return (MNIST_DIR / "train-images-idx3-ubyte.gz").exists()


_cache = {}


def mnist(binarize=True):
    """Train/test MNIST-1-7 sets, loaded once per session."""
    if not mnist_available():
        pytest.skip(f"MNIST IDX files not found in {MNIST_DIR}; run scripts/prepare_data.py")
    if binarize not in _cache:
        _cache[binarize] = tuple(
            load_mnist_idx(MNIST_DIR / f"{p}-images-idx3-ubyte.gz", MNIST_DIR / f"{p}-labels-idx1-ubyte.gz",
                           binarize=binarize)
            for p in ("train", "t10k"))
    return _cache[binarize]
