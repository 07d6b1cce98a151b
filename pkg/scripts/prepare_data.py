"""Write the datasets used by the tests and demos into ``data/``.

MNIST: the canonical download hosts are not always reachable, so the digits
are rebuilt from the pickled copy shipped in the ``mnist-hub`` wheel (pixel
values stored as ``p / 256`` floats, recovered exactly).  The wheel's train
and validation parts concatenate to the original 60000-image training file.

Iris: copied from the CSV bundled with scikit-learn when it is installed.

black_white.csv: the 13-point toy set, for trying the CLI.

    python3 scripts/prepare_data.py [--pickle mnist.pkl.gz]
"""
import argparse
import csv
import gzip
import pickle
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np

from poison_proof.dataset import write_csv, write_idx
from poison_proof.toy import black_white

DATA = Path(__file__).resolve().parent.parent / "data"
WHEEL = "mnist-hub==0.1.4"
IRIS_SPECIES = ("setosa", "versicolor", "virginica")


def fetch_pickle(tmp: Path) -> Path:
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(tmp), WHEEL], check=True)
    wheel = next(tmp.glob("mnist_hub-*.whl"))
    with zipfile.ZipFile(wheel) as zf:
        zf.extract("mnist/data/mnist.pkl.gz", tmp)
    return tmp / "mnist" / "data" / "mnist.pkl.gz"


def write_mnist(pkl: Path, out: Path):
    with gzip.open(pkl, "rb") as fh:
        train, valid, test = pickle.load(fh, encoding="latin1")

    def pixels(x):
        px = np.rint(np.asarray(x, dtype=np.float64) * 256)
        assert px.min() >= 0 and px.max() <= 255
        return px.astype(np.uint8).reshape(-1, 28, 28)

    out.mkdir(parents=True, exist_ok=True)
    write_idx(out / "train-images-idx3-ubyte.gz", np.concatenate([pixels(train[0]), pixels(valid[0])]))
    write_idx(out / "train-labels-idx1-ubyte.gz", np.concatenate([train[1], valid[1]]).astype(np.uint8))
    write_idx(out / "t10k-images-idx3-ubyte.gz", pixels(test[0]))
    write_idx(out / "t10k-labels-idx1-ubyte.gz", np.asarray(test[1], dtype=np.uint8))


def write_iris(out: Path):
    try:
        import sklearn
    except ImportError:
        print("scikit-learn not installed; skipping iris", file=sys.stderr)
        return
    src = Path(sklearn.__file__).parent / "datasets" / "data" / "iris.csv"
    with open(src) as fh:
        rows = list(csv.reader(fh))[1:]
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sepal_length", "sepal_width", "petal_length", "petal_width", "species"])
        for r in rows:
            w.writerow(r[:4] + [IRIS_SPECIES[int(r[4])]])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pickle", type=Path, help="local copy of mnist.pkl.gz (skips the download)")
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(black_white(), args.out / "black_white.csv")
    write_iris(args.out / "iris.csv")
    with tempfile.TemporaryDirectory() as tmp:
        pkl = args.pickle or fetch_pickle(Path(tmp))
        write_mnist(pkl, args.out / "mnist")
    print(f"wrote datasets under {args.out}")


if __name__ == "__main__":
    main()
