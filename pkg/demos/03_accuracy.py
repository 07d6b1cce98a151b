"""Test-set accuracy per depth on Iris and MNIST 1-vs-7 (run scripts/prepare_data.py first)."""
from fractions import Fraction
from pathlib import Path

from poison_proof.dataset import load_csv, load_mnist_idx, train_test_split
from poison_proof.learner import accuracy

DATA = Path(__file__).resolve().parent.parent / "data"

train, test = train_test_split(load_csv(DATA / "iris.csv"), Fraction(4, 5), seed=0)
print("iris", {d: round(100 * accuracy(train, test, d), 2) for d in (1, 2, 3, 4)})

m = DATA / "mnist"
for binarize in (True, False):
    tr = load_mnist_idx(m / "train-images-idx3-ubyte.gz", m / "train-labels-idx1-ubyte.gz", binarize=binarize)
    te = load_mnist_idx(m / "t10k-images-idx3-ubyte.gz", m / "t10k-labels-idx1-ubyte.gz", binarize=binarize)
    kind = "binary" if binarize else "real"
    print(f"mnist-1-7-{kind} ({len(tr)} train, {len(te)} test)",
          {d: round(100 * accuracy(tr, te, d), 2) for d in (1, 2, 3, 4)})
