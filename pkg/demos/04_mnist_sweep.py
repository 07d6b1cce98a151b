"""How far n can go on a few MNIST digits, box against disjuncts.

Depth 1 and 2 finish in seconds per digit.  Depth 3 with disjuncts can
produce tens of thousands of abstract states; the timeout keeps it bounded.
"""
from pathlib import Path

import numpy as np

from poison_proof.abstract import Limits
from poison_proof.cli import run_sweep, sweep_summary
from poison_proof.dataset import load_mnist_idx

m = Path(__file__).resolve().parent.parent / "data" / "mnist"
train = load_mnist_idx(m / "train-images-idx3-ubyte.gz", m / "train-labels-idx1-ubyte.gz", binarize=True)
test = load_mnist_idx(m / "t10k-images-idx3-ubyte.gz", m / "t10k-labels-idx1-ubyte.gz", binarize=True)
picked = sorted(int(i) for i in np.random.default_rng(1).choice(len(test), 5, replace=False))
tests = {i: test.example(i) for i in picked}

for depth in (1, 2):
    for dom in ("box", "disjuncts"):
        rec = run_sweep(train, tests, depth, dom, "optimal", Limits(timeout_s=30), max_n=128)
        summary = {n: v["verified"] for n, v in sweep_summary(rec, len(tests)).items()}
        print(f"depth {depth} {dom:<9} verified per n: {summary}")
