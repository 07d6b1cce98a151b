"""Command-line front end.

    poison-proof train  --dataset iris.csv --depth 1 2 3 4
    poison-proof verify --dataset bw.csv --x 5 --n 2 --depth 1
    poison-proof sweep  --dataset data/mnist --format mnist --binarize --depth 2 --out sweep.csv
    poison-proof oracle --dataset bw.csv --x 5 --n 2 --cross-check

Exit codes: 0 robust / success, 1 not proven (or not robust), 2 usage or
load error, 3 the verifier claimed robustness the oracle refutes.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .abstract import BOX, DISJUNCTS, NAIVE, OPTIMAL, Limits, verify
from .dataset import DatasetError, Example, TrainingSet, load_csv, load_mnist_idx, to_fraction, train_test_split
from .learner import LearnerConfig, accuracy
from .oracle import DEFAULT_BUDGET, BudgetExceeded, brute_force_verify

EXIT_OK, EXIT_NOT_PROVEN, EXIT_USAGE, EXIT_DISAGREE = 0, 1, 2, 3
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


class UsageError(Exception):
    pass


@dataclass
class Data:
    train: TrainingSet
    test: TrainingSet


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _natural(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def _threads() -> int:
    raw = os.environ.get("POISON_PROOF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"POISON_PROOF_THREADS must be an integer, got {raw!r}") from None


def _find(directory: Path, stem: str) -> Path:
    for name in (stem + ".gz", stem, stem.replace("-idx", ".idx")):
        if (directory / name).exists():
            return directory / name
    raise DatasetError(f"{directory}: missing {stem}[.gz]")


def load_data(args) -> Data:
    path = Path(args.dataset)
    if not path.exists():
        raise DatasetError(f"{path}: no such file or directory")
    if args.format == "mnist":
        keep = tuple(int(d) for d in args.keep_labels.split(","))
        sets = {part: load_mnist_idx(_find(path, img), _find(path, lab), keep, args.binarize)
                for part, (img, lab) in MNIST_FILES.items()}
        return Data(sets["train"], sets["test"])
    T = load_csv(path, drop_missing=args.drop_missing)
    if getattr(args, "test_file", None):
        test = load_csv(args.test_file, class_names=T.schema.class_names, drop_missing=args.drop_missing)
        return Data(T, test)
    if getattr(args, "no_split", False) or getattr(args, "x", None) is not None:
        return Data(T, T)
    train, test = train_test_split(T, Fraction(args.train_fraction), args.seed)
    return Data(train, test)


def _inline_example(text: str, T: TrainingSet) -> Example:
    values = [to_fraction(v) for v in text.split(",")]
    if len(values) != T.schema.feature_count:
        raise UsageError(f"--x has {len(values)} values, the dataset has {T.schema.feature_count} features")
    return Example(tuple(values))


def _pick(args, data: Data) -> tuple[Example, int | None]:
    if args.x is not None:
        return _inline_example(args.x, data.train), None
    if args.test_index is None:
        raise UsageError("give --x or --test-index")
    if not 0 <= args.test_index < len(data.test):
        raise UsageError(f"--test-index {args.test_index} outside [0, {len(data.test)})")
    return data.test.example(args.test_index), args.test_index


def _limits(args) -> Limits:
    mem = int(args.max_memory_mb * 2**20) if args.max_memory_mb else None
    return Limits(args.timeout_s, args.max_disjuncts, mem)


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


# -- subcommands ------------------------------------------------------------------------


def cmd_train(args) -> int:
    data = load_data(args)
    acc = {str(d): round(100 * accuracy(data.train, data.test, d), 4) for d in args.depth}
    _emit({"trainSize": len(data.train), "testSize": len(data.test), "seed": args.seed,
           "accuracyPercent": acc}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    data = load_data(args)
    x, index = _pick(args, data)
    if args.n > len(data.train):
        raise UsageError(f"--n {args.n} exceeds the training set size {len(data.train)}")
    out = verify(data.train, x, args.n, LearnerConfig(args.depth), args.domain, args.cprob, _limits(args))
    report = out.to_json()
    names = data.train.schema.class_names
    if out.robust:
        report["labelName"] = names[out.label]
    else:
        report["candidateNames"] = [names[i] for i in sorted(out.candidates)]
    report.update({"n": args.n, "depth": args.depth, "testIndex": index})
    _emit(report, args.out)
    return EXIT_OK if out.robust else EXIT_NOT_PROVEN


SWEEP_COLUMNS = ["testIndex", "n", "verdict", "failure", "label", "elapsedMs", "peakDisjuncts",
                 "domainMode", "cprob", "depth", "seed"]


def _sample(data: Data, args) -> list[int]:
    m = len(data.test)
    if args.subset_size is None or args.subset_size >= m:
        return list(range(m))
    return sorted(int(i) for i in np.random.default_rng(args.seed).choice(m, args.subset_size, replace=False))


def run_sweep(train: TrainingSet, tests: dict, depth: int, domain: str, mode: str, limits: Limits,
              threads: int = 1, seed: int | None = None, max_n: int | None = None) -> list[dict]:
    """Doubling-then-bisection search for the largest n at which some test point still verifies.

    ``tests`` maps test index to example.  Only points verified at the
    previous n are tried at the next one.
    """
    cfg = LearnerConfig(depth)
    cap = min(len(train), max_n or len(train))
    records: list[dict] = []

    def attempt(indices, n):
        def one(i):
            out = verify(train, tests[i], n, cfg, domain, mode, limits)
            failure = "" if out.robust else (out.limit_exceeded or "imprecise")
            return {"testIndex": i, "n": n, "verdict": out.verdict, "failure": failure,
                    "label": "" if out.label is None else out.label,
                    "elapsedMs": round(out.elapsed_ms, 3), "peakDisjuncts": out.peak_disjuncts,
                    "domainMode": domain, "cprob": mode, "depth": depth, "seed": "" if seed is None else seed}
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                rows = list(pool.map(one, indices))
        else:
            rows = [one(i) for i in indices]
        records.extend(rows)
        return [r["testIndex"] for r in rows if r["verdict"] == "robust"]

    alive = sorted(tests)
    if not alive:
        return records
    n, last_ok = 1, 0
    while n <= cap:
        ok = attempt(alive, n)
        if not ok:
            break
        alive, last_ok = ok, n
        n *= 2
    # bisect between the last success and the first failure (or one past the cap)
    lo, hi = last_ok, min(n, cap + 1)
    if lo >= 1:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            ok = attempt(alive, mid)
            if ok:
                alive, lo = ok, mid
            else:
                hi = mid
    records.sort(key=lambda r: (r["n"], r["testIndex"]))
    return records


def sweep_summary(records: list[dict], total: int) -> dict:
    out = {}
    for r in records:
        out.setdefault(r["n"], 0)
        out[r["n"]] += r["verdict"] == "robust"
    return {str(n): {"verified": c, "fraction": c / total if total else 0.0} for n, c in sorted(out.items())}


def cmd_sweep(args) -> int:
    data = load_data(args)
    indices = _sample(data, args)
    tests = {i: data.test.example(i) for i in indices}
    records = run_sweep(data.train, tests, args.depth, args.domain, args.cprob, _limits(args),
                        _threads(), args.seed, args.max_n)
    target = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(target, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        w.writerows(records)
    finally:
        if args.out:
            target.close()
    if args.out:
        print(json.dumps({"seed": args.seed, "tests": len(indices), "testIndices": indices,
                          "verifiedByN": sweep_summary(records, len(indices))}, indent=2))
    return EXIT_OK


def cmd_oracle(args) -> int:
    data = load_data(args)
    x, index = _pick(args, data)
    cfg = LearnerConfig(args.depth)
    report = brute_force_verify(data.train, x, args.n, cfg, args.budget)
    result = report.to_json()
    result.update({"n": args.n, "depth": args.depth, "testIndex": index})
    code = EXIT_OK if report.robust else EXIT_NOT_PROVEN
    if args.cross_check:
        out = verify(data.train, x, args.n, cfg, args.domain, args.cprob, _limits(args))
        result["verifier"] = out.to_json()
        if out.robust and not report.robust:
            code = EXIT_DISAGREE
    _emit(result, args.out)
    return code


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="poison-proof", description="Verify decision-tree predictions "
                                "against removal of up to n training elements.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", required=True, help="CSV file, or a directory of IDX files for --format mnist")
    common.add_argument("--format", choices=["csv", "mnist"], default="csv")
    common.add_argument("--binarize", action="store_true", help="MNIST: keep only each pixel's top bit")
    common.add_argument("--keep-labels", default="1,7", help="MNIST digits to keep (default 1,7)")
    common.add_argument("--test-file", help="CSV of test points (default: seeded 80/20 split of --dataset)")
    common.add_argument("--no-split", action="store_true", help="use the whole dataset as both train and test")
    common.add_argument("--train-fraction", default="4/5")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--drop-missing", action="store_true", help="skip CSV rows with missing values")
    common.add_argument("--out", help="also write the report to this file")

    learn = argparse.ArgumentParser(add_help=False)
    learn.add_argument("--depth", type=_positive, default=1)
    learn.add_argument("--domain", choices=[BOX, DISJUNCTS], default=DISJUNCTS)
    learn.add_argument("--cprob", choices=[OPTIMAL, NAIVE], default=OPTIMAL)
    learn.add_argument("--timeout-s", type=float, default=3600.0)
    learn.add_argument("--max-disjuncts", type=_positive)
    learn.add_argument("--max-memory-mb", type=float, help="limit on the estimated state memory")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--n", type=_natural, required=True, help="number of removed training elements")
    point.add_argument("--test-index", type=_natural)
    point.add_argument("--x", help="inline test point, comma-separated feature values (trains on all data)")

    t = sub.add_parser("train", parents=[common], help="test-set accuracy per depth")
    t.add_argument("--depth", type=_positive, nargs="+", default=[1, 2, 3, 4])
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("verify", parents=[common, learn, point], help="verify one test point")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common, learn], help="doubling/bisection sweep over test points")
    s.add_argument("--subset-size", type=_natural, help="seeded sample of this many test points")
    s.add_argument("--max-n", type=_positive)
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", parents=[common, learn, point], help="brute-force enumeration")
    o.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    o.add_argument("--cross-check", action="store_true", help="also run the verifier; exit 3 if it is refuted")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, DatasetError, BudgetExceeded, ValueError, OSError) as exc:
        print(f"poison-proof: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
