"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line.

The lines are printed in the terminal summary at the end of the run:
``pytest tests/test_acceptance.py -q``.
"""
import time
from contextlib import contextmanager
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, DATA, mnist
from helpers import members
from poison_proof import abstract, domain
from poison_proof.abstract import BOX, DISJUNCTS, NAIVE, OPTIMAL, Limits, cprob_abs, filter_abs, filter_branches, verify
from poison_proof.dataset import load_csv, train_test_split
from poison_proof.domain import AbstractTrainingSet, Threshold
from poison_proof.interval import Interval
from poison_proof.learner import accuracy, best_split, cprob, dtrace, ent, restrict, score
from poison_proof.oracle import brute_force_verify, soundness_sweep
from poison_proof.toy import BLACK, WHITE, black_white, point

SWEEP_SEED = 0


@contextmanager
def criterion(number, title, budget_s):
    start = time.perf_counter()
    status, note = "PASS", ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if elapsed > budget_s:
            status, note = "FAIL", f" over the {budget_s}s budget"
            raise AssertionError(f"criterion {number} took {elapsed:.1f}s, budget {budget_s}s")
    except BaseException as exc:
        status = "FAIL"
        note = note or f" ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        raise
    finally:
        elapsed = time.perf_counter() - start
        ACCEPTANCE_LINES.append(f"ACCEPTANCE {number} {status}: {title} [{elapsed:.2f}s]{note}")


def test_1_running_example_exact():
    with criterion(1, "worked example: cprob, ent, score, best split, depth-1 label", 1):
        T = black_white()
        left = restrict(T, Threshold(0, 10))
        assert cprob(left) == (F(7, 9), F(2, 9))
        assert ent(left) == F(28, 81)
        assert score(T, Threshold(0, 10)) == F(28, 9)
        assert best_split(T) == Threshold(0, F(21, 2))
        assert dtrace(T, point(18), 1).label == BLACK


def test_2_cprob_transformer_example():
    with criterion(2, "naive and optimal abstract class probabilities on <left, 2>", 1):
        left = restrict(black_white(), Threshold(0, 10))
        A = AbstractTrainingSet.from_set(left, 2)
        assert cprob_abs(A, NAIVE) == (Interval(F(5, 9), 1), Interval(0, F(2, 7)))
        assert cprob_abs(A, OPTIMAL) == (Interval(F(5, 7), 1), Interval(0, F(2, 7)))
        probs = [cprob(T) for T in members(A)]
        assert cprob_abs(A, OPTIMAL) == tuple(Interval(min(p[i] for p in probs), max(p[i] for p in probs))
                                              for i in range(2))


def test_3_robustness_instance():
    with criterion(3, "verify(x=5, n=2, depth 1, disjuncts) is robust white; oracle agrees over 92 sets", 1):
        T = black_white()
        report = brute_force_verify(T, point(5), 2, 1)
        assert report.robust and report.label == WHITE and report.datasets_checked == 92
        out = verify(T, point(5), 2, 1, DISJUNCTS)
        assert out.robust, f"verifier returned {out.verdict} with posterior {out.posterior}"
        assert out.label == WHITE


@pytest.fixture(scope="module")
def sweep():
    start = time.perf_counter()
    report = soundness_sweep(SWEEP_SEED, 200)
    return report, time.perf_counter() - start


def test_4_soundness_suite(sweep):
    report, elapsed = sweep
    with criterion(4, f"soundness on 200 random instances, both domains and cprob modes [sweep {elapsed:.1f}s]", 300):
        assert report.trials == 200
        assert elapsed < 300
        bad = [v for v in report.violations if v.kind != "precision"]
        assert bad == [], bad[:5]


def test_5_precision_ordering(sweep):
    report, elapsed = sweep
    with criterion(5, "box robust implies disjuncts robust on the same 200 instances", 300):
        assert elapsed < 300
        bad = [v for v in report.violations if v.kind == "precision"]
        assert bad == [], bad[:5]


def test_6_disjunct_precision_example():
    with criterion(6, "filter on <left, 1> with {x<=3, x<=4}, x=4: box slack 5, two disjuncts of slack 1", 1):
        left = restrict(black_white(), Threshold(0, 10))
        A = AbstractTrainingSet.from_set(left, 1)
        preds = {Threshold(0, 3), Threshold(0, 4)}
        assert filter_abs(A, preds, point(4)).n == 5
        parts = filter_branches(A, preds, point(4))
        assert len(parts) == 2 and [p.n for p in parts] == [1, 1]


def test_7a_iris_accuracy():
    with criterion("7a", "iris depth-2 accuracy within 90 +- 7 (seeded 80/20 split)", 5):
        train, test = train_test_split(load_csv(DATA / "iris.csv"), F(4, 5), seed=0)
        acc = 100 * accuracy(train, test, 2)
        assert abs(acc - 90.0) <= 7, acc


def test_7b_mnist_accuracy():
    with criterion("7b", "MNIST-1-7 binary depth-1 accuracy within 95.7 +- 1.5 on 2163 test digits", 600):
        train, test = mnist(binarize=True)
        assert len(test) == 2163
        acc = 100 * accuracy(train, test, 1)
        assert abs(acc - 95.7) <= 1.5, acc


def test_8_mnist_verification():
    with criterion(8, "MNIST binary depth 1, 25 seeded test digits: box verifies at n=16, counts antitone, "
                   "disjuncts contain box", 3600):
        train, test = mnist(binarize=True)
        idx = sorted(int(i) for i in np.random.default_rng(0).choice(len(test), 25, replace=False))
        limits = Limits(timeout_s=60)

        def verified(n, dom):
            out = set()
            for i in idx:
                t = time.perf_counter()
                res = verify(train, test.example(i), n, 1, dom, limits=limits)
                assert time.perf_counter() - t < 60
                if res.robust:
                    out.add(i)
            return out

        box = {n: verified(n, BOX) for n in (1, 2, 4, 8, 16, 32)}
        assert len(box[16]) >= 1
        for n in (1, 2, 4, 8, 16):
            assert len(box[n]) >= len(box[2 * n])
        for n in (1, 4, 16):
            assert box[n] <= verified(n, DISJUNCTS)


def _loose_init(self, root, mask, n):
    self.root, self.mask, self.n = root, np.asarray(mask, dtype=bool), int(n)
    self._size = int(self.mask.sum())


def test_9_mutation_sensitivity(monkeypatch):
    with criterion(9, "dropping the restriction clamp or narrowing cprob is caught by the sweep", 300):
        with monkeypatch.context() as m:
            m.setattr(domain, "restricted_slack", lambda n, size: n)
            m.setattr(domain.AbstractTrainingSet, "__init__", _loose_init)
            assert soundness_sweep(SWEEP_SEED, 200).violations
        real = abstract.cprob_from_counts

        def narrowed(size, n, counts, mode=OPTIMAL):
            return tuple(Interval(iv.lo + (iv.hi - iv.lo) / 4, iv.hi - (iv.hi - iv.lo) / 4)
                         for iv in real(size, n, counts, mode))

        with monkeypatch.context() as m:
            m.setattr(abstract, "cprob_from_counts", narrowed)
            assert soundness_sweep(SWEEP_SEED, 200).violations
