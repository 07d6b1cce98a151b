"""Ground truth by enumeration: retrain on every training set with up to n elements removed."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .abstract import BOX, DISJUNCTS, NAIVE, OPTIMAL, analyze_split, cprob_abs, dtrace_abs
from .dataset import Example, FeatureSchema, TrainingSet
from .domain import NULL, AbstractTrainingSet, gamma_count
from .learner import LearnerConfig, best_split, cprob, dtrace, restrict, score

DEFAULT_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"{count} training sets to enumerate exceeds the budget of {budget}")
        self.count = count
        self.budget = budget


def enumerate_removals(size: int, n: int, budget: int = DEFAULT_BUDGET) -> Iterator[tuple[int, ...]]:
    """Positions to remove: size-ascending, lexicographic within a size."""
    if not 0 <= n <= size:
        raise ValueError(f"n={n} must lie in [0, {size}]")
    count = gamma_count(size, n)
    if count > budget:
        raise BudgetExceeded(count, budget)
    for r in range(n + 1):
        yield from itertools.combinations(range(size), r)


def enumerate_delta(T: TrainingSet, n: int, budget: int = DEFAULT_BUDGET) -> Iterator[TrainingSet]:
    """Every subset of ``T`` with at most ``n`` elements removed, each exactly once."""
    for removed in enumerate_removals(len(T), n, budget):
        keep = [True] * len(T)
        for j in removed:
            keep[j] = False
        yield T.subset(keep)


@dataclass
class OracleReport:
    robust: bool
    label: int
    label_set: frozenset
    datasets_checked: int
    first_counterexample: tuple | None = None  # removed element ids

    def to_json(self) -> dict:
        out = {
            "verdict": "robust" if self.robust else "not-robust",
            "label": self.label,
            "labelSet": sorted(self.label_set),
            "datasetsChecked": self.datasets_checked,
        }
        if self.first_counterexample is not None:
            out["firstCounterexample"] = list(self.first_counterexample)
        return out


def concrete_labels(T: TrainingSet, x: Example, n: int, cfg, budget: int = DEFAULT_BUDGET):
    """``(removed ids, label)`` for every member of the poisoned family; the empty set gets ``None``."""
    for removed in enumerate_removals(len(T), n, budget):
        keep = [True] * len(T)
        for j in removed:
            keep[j] = False
        sub = T.subset(keep)
        ids = tuple(int(T.ids[j]) for j in removed)
        yield ids, (dtrace(sub, x, cfg).label if len(sub) else None)


def brute_force_verify(T: TrainingSet, x: Example, n: int, cfg: LearnerConfig | int,
                       budget: int = DEFAULT_BUDGET) -> OracleReport:
    """Retrain on every member and compare each label with the unpoisoned one.

    When ``n == |T|`` the family contains the empty training set, on which the
    learner is undefined; it is counted but contributes no label.
    """
    if isinstance(cfg, int):
        cfg = LearnerConfig(cfg)
    if len(T) < 1:
        raise ValueError("cannot run the oracle on an empty training set")
    reference = dtrace(T, x, cfg).label
    labels, checked, first = set(), 0, None
    for ids, label in concrete_labels(T, x, n, cfg, budget):
        checked += 1
        if label is None:
            continue
        labels.add(label)
        if label != reference and first is None:
            first = ids
    return OracleReport(first is None, reference, frozenset(labels), checked, first)


# -- randomized soundness sweep -----------------------------------------------------


@dataclass(frozen=True)
class SweepBounds:
    max_size: int = 12
    max_features: int = 3
    max_classes: int = 3
    max_n: int = 2
    max_depth: int = 3
    max_value: int = 4


@dataclass
class Violation:
    trial: int
    kind: str
    detail: str


@dataclass
class SweepReport:
    trials: int = 0
    violations: list = field(default_factory=list)
    # abstract verdicts that hold at n but not at a smaller n; reported, not treated as errors
    abstract_antitone_gaps: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def random_instance(rng: random.Random, bounds: SweepBounds):
    f = rng.randint(1, bounds.max_features)
    k = rng.randint(2, bounds.max_classes)
    size = rng.randint(2, bounds.max_size)
    schema = FeatureSchema.simple(f, [f"c{i}" for i in range(k)])
    examples = [Example(tuple(rng.randint(0, bounds.max_value) for _ in range(f)), rng.randrange(k))
                for _ in range(size)]
    T = TrainingSet.from_examples(schema, examples)
    # test points sometimes fall between training values
    x = Example(tuple(Fraction(rng.randint(0, 2 * bounds.max_value + 2), 2) for _ in range(f)))
    n = rng.randint(0, min(bounds.max_n, size - 1))
    depth = rng.randint(1, bounds.max_depth)
    return T, x, n, depth


def _exact_cprob_range(T: TrainingSet, n: int, k: int):
    lo, hi = [Fraction(1)] * k, [Fraction(0)] * k
    for sub in enumerate_delta(T, n):
        if len(sub) == 0:
            continue
        for i, p in enumerate(cprob(sub)):
            lo[i], hi[i] = min(lo[i], p), max(hi[i], p)
    return lo, hi


def check_split(trial: int, T: TrainingSet, n: int) -> list[Violation]:
    """The abstract best split covers every concrete one; restrictions and scores are contained."""
    A = AbstractTrainingSet.from_set(T, n)
    found = []
    for mode in (OPTIMAL, NAIVE):
        split = analyze_split(A, mode)
        for sub in enumerate_delta(T, n):
            if len(sub) == 0:
                continue
            phi = best_split(sub)
            if phi is NULL:
                if NULL not in split.chosen:
                    found.append(Violation(trial, "split", f"{mode}: NULL possible but not returned"))
                continue
            tiles = [rho for rho in split.scores if rho.covers(phi)]
            if not tiles:
                found.append(Violation(trial, "split", f"{mode}: no symbolic predicate covers {phi}"))
                continue
            rho = tiles[0]
            if rho not in split.chosen:
                found.append(Violation(trial, "split", f"{mode}: best split {phi} of a member not returned"))
            if score(sub, phi) not in split.scores[rho]:
                found.append(Violation(trial, "score", f"{mode}: score of {phi} outside {split.scores[rho]}"))
            for side in (True, False):
                if not A.restrict(rho, side).gamma_contains(restrict(sub, phi, side)):
                    found.append(Violation(trial, "restrict", f"{rho} side {side} misses a member"))
    return found


def check_instance(trial: int, T: TrainingSet, x: Example, n: int, depth: int) -> list[Violation]:
    """All soundness and precision checks for one instance."""
    cfg = LearnerConfig(depth)
    found = []
    by_n = {m: {label for _, label in concrete_labels(T, x, m, cfg)} - {None} for m in range(n + 1)}
    labels = by_n[n]
    reference = dtrace(T, x, cfg).label
    A = AbstractTrainingSet.from_set(T, n)
    found.extend(check_split(trial, T, n))
    verdicts = {}
    for domain in (BOX, DISJUNCTS):
        for mode in (OPTIMAL, NAIVE):
            try:
                out = dtrace_abs(A, x, cfg, domain, mode)
            except Exception as exc:  # a crash is reported, not hidden
                found.append(Violation(trial, "error", f"{domain}/{mode}: {exc!r}"))
                continue
            verdicts[domain, mode] = out.robust
            if not labels <= out.candidates:
                found.append(Violation(trial, "candidates",
                                       f"{domain}/{mode}: labels {sorted(labels)} not in {sorted(out.candidates)}"))
            if out.robust and labels != {out.label}:
                found.append(Violation(trial, "robust", f"{domain}/{mode}: proved {out.label}, oracle saw {sorted(labels)}"))
            if out.robust and out.label != reference:
                found.append(Violation(trial, "robust", f"{domain}/{mode}: proved {out.label}, concrete {reference}"))
    for mode in (OPTIMAL, NAIVE):
        if verdicts.get((BOX, mode)) and verdicts.get((DISJUNCTS, mode)) is False:
            found.append(Violation(trial, "precision", f"{mode}: box robust, disjuncts not"))
    if n < len(T):
        k = T.schema.class_count
        lo, hi = _exact_cprob_range(T, n, k)
        got = cprob_abs(A, OPTIMAL)
        if [iv.lo for iv in got] != lo or [iv.hi for iv in got] != hi:
            found.append(Violation(trial, "cprob", f"optimal cprob {got} != exact {list(zip(lo, hi))}"))
    robust_at = [len(by_n[m] | {reference}) == 1 for m in range(n + 1)]
    if any(robust_at[m] and not robust_at[m - 1] for m in range(1, n + 1)):
        found.append(Violation(trial, "antitone", f"oracle robustness not antitone: {robust_at}"))
    return found


def soundness_sweep(seed: int, trials: int, bounds: SweepBounds | None = None) -> SweepReport:
    """Random small instances checked against the oracle; the violation list should stay empty."""
    bounds = bounds or SweepBounds()
    rng = random.Random(seed)
    report = SweepReport()
    for t in range(trials):
        T, x, n, depth = random_instance(rng, bounds)
        report.violations.extend(check_instance(t, T, x, n, depth))
        report.trials += 1
        if n > 0 and dtrace_abs(AbstractTrainingSet.from_set(T, n), x, depth).robust:
            smaller = [m for m in range(n) if not dtrace_abs(AbstractTrainingSet.from_set(T, m), x, depth).robust]
            if smaller:
                report.abstract_antitone_gaps.append((t, n, smaller))
    return report
