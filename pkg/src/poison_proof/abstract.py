"""Abstract interpretation of the trace learner over <T, n> training-set abstractions.

Two domains are supported:

``box``
    one abstract state; branches and predicate alternatives are joined.
``disjuncts``
    a finite set of abstract states; joins are set unions.

Thresholds are handled symbolically: each adjacent pair of values ``(a, b)``
of a feature in the current base set gives the predicate ``x <= [a, b)``,
which covers every threshold any concretization can produce.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dataset import Example, TrainingSet
from . import domain
from .domain import NULL, AbstractTrainingSet, Predicate, SymbolicThreshold, Truth, join_all
from .interval import Interval, dominates, join_vectors, possible_argmax
from .learner import LearnerConfig, dtrace, split_table

BOX = "box"
DISJUNCTS = "disjuncts"
OPTIMAL = "optimal"
NAIVE = "naive"

_UNIT = Interval(0, 1)


# -- auxiliary transformers -------------------------------------------------------


def size_abs(A: AbstractTrainingSet) -> Interval:
    return Interval(A.size - A.n, A.size)


def cprob_from_counts(size: int, n: int, counts: Sequence[int], mode: str = OPTIMAL) -> tuple[Interval, ...]:
    """Class-probability intervals for ``<T, n>`` given ``|T|`` and class counts.

    ``optimal`` gives the exact range of each component over all
    concretizations: keeping ``m = |T| - n`` elements, the extreme averages of
    the class indicator are ``max(0, c - n) / m`` and ``min(c, m) / m``.
    ``naive`` divides the count interval by the size interval.
    """
    k = len(counts)
    if n >= size:
        return (_UNIT,) * k
    kept = size - n
    if mode == OPTIMAL:
        return tuple(Interval(Fraction(max(0, int(c) - n), kept), Fraction(min(int(c), kept), kept))
                     for c in counts)
    if mode == NAIVE:
        denom = Interval(kept, size)
        return tuple(Interval(max(0, int(c) - n), int(c)) / denom for c in counts)
    raise ValueError(f"unknown cprob mode {mode!r}")


def cprob_abs(A: AbstractTrainingSet, mode: str = OPTIMAL) -> tuple[Interval, ...]:
    return cprob_from_counts(A.size, A.n, A.class_counts, mode)


def ent_from_cprob(probs: Sequence[Interval]) -> Interval:
    """Interval Gini impurity, clipped to the attainable range ``[0, (k-1)/k]``."""
    k = len(probs)
    total = Interval(0)
    for iv in probs:
        total = total + iv * (1 - iv)
    return total.meet(Interval(0, Fraction(k - 1, k)))


def ent_abs(A: AbstractTrainingSet, mode: str = OPTIMAL) -> Interval:
    return ent_from_cprob(cprob_abs(A, mode))


def _side_score(size: int, n: int, counts, mode: str) -> Interval:
    return Interval(size - n, size) * ent_from_cprob(cprob_from_counts(size, n, counts, mode))


def score_abs(A: AbstractTrainingSet, phi: Predicate, mode: str = OPTIMAL) -> Interval:
    left = A.restrict(phi, True)
    right = A.restrict(phi, False)
    return (_side_score(left.size, left.n, left.class_counts, mode)
            + _side_score(right.size, right.n, right.class_counts, mode))


# -- best split --------------------------------------------------------------------


def candidate_predicates_abs(A: AbstractTrainingSet) -> list[SymbolicThreshold]:
    """One symbolic predicate per adjacent pair of distinct values in the base set."""
    feats, lo, hi, _ = split_table(A.root, A.mask)
    levels = A.root.levels
    return [SymbolicThreshold(int(i), levels[i][a], levels[i][b]) for i, a, b in zip(feats, lo, hi)]


def minimal_candidates(scores: dict, universal: Iterable) -> list:
    """Predicates whose score interval reaches down to the lowest upper bound among ``universal``."""
    lub = min(scores[p].hi for p in universal)
    return [p for p, iv in scores.items() if iv.lo <= lub]


@dataclass
class SplitAnalysis:
    """Per-predicate data behind one abstract best-split computation."""

    scores: dict
    universal: list
    existential: list
    chosen: frozenset


def analyze_split(A: AbstractTrainingSet, mode: str = OPTIMAL) -> SplitAnalysis:
    """Abstract best split with its intermediate sets.

    A candidate ``x <= [a, b)`` is built from adjacent values of the base set,
    so no base element lies strictly between ``a`` and ``b`` and its symbolic
    restriction coincides with the restriction at ``a``.  That lets every
    candidate be scored from one table of per-class counts.
    """
    feats, lo, hi, left = split_table(A.root, A.mask)
    levels = A.root.levels
    total = np.asarray(A.class_counts)
    scores: dict = {}
    universal, existential = [], []
    for j in range(len(feats)):
        i = int(feats[j])
        rho = SymbolicThreshold(i, levels[i][lo[j]], levels[i][hi[j]])
        lc = left[j]
        rc = total - lc
        ls, rs = int(lc.sum()), int(rc.sum())
        ln, rn = domain.restricted_slack(A.n, ls), domain.restricted_slack(A.n, rs)
        if ls == 0 or rs == 0:
            continue  # some side's abstraction is <{}, 0>
        existential.append(rho)
        if ln != ls and rn != rs:
            universal.append(rho)
        scores[rho] = _side_score(ls, ln, lc, mode) + _side_score(rs, rn, rc, mode)
    if not universal:
        chosen = frozenset(existential) | {NULL}
    else:
        chosen = frozenset(minimal_candidates({p: scores[p] for p in existential}, universal))
    return SplitAnalysis(scores, universal, existential, chosen)


def best_split_abs(A: AbstractTrainingSet, mode: str = OPTIMAL) -> frozenset:
    """Set of predicates (possibly including ``NULL``) any concretization may split on."""
    return analyze_split(A, mode).chosen


# -- filter, conditionals ----------------------------------------------------------


def _order(preds) -> list:
    return sorted((p for p in preds if p is not NULL), key=lambda p: (p.feature, getattr(p, "lower", getattr(p, "threshold", 0))))


def filter_branches(A: AbstractTrainingSet, preds, x: Example) -> list[AbstractTrainingSet]:
    """Restrictions of ``A`` to the side(s) of each predicate that ``x`` may take."""
    out = []
    for p in _order(preds):
        truth = p.evaluate(x)
        if truth in (Truth.TRUE, Truth.MAYBE):
            out.append(A.restrict(p, True))
        if truth in (Truth.FALSE, Truth.MAYBE):
            out.append(A.restrict(p, False))
    return out


def filter_abs(A: AbstractTrainingSet, preds, x: Example) -> AbstractTrainingSet:
    if NULL in preds:
        raise ValueError("strip NULL before filtering")
    return join_all(A.root, filter_branches(A, preds, x))


def pure(A: AbstractTrainingSet, label: int) -> AbstractTrainingSet | None:
    """Concretizations made only of class ``label``; ``None`` when there are none."""
    keep = A.mask & (A.root.labels == label)
    dropped = A.size - int(np.count_nonzero(keep))
    if dropped > A.n:
        return None
    return AbstractTrainingSet(A.root, keep, A.n - dropped)


def pure_parts(A: AbstractTrainingSet) -> list[AbstractTrainingSet]:
    return [p for i in range(A.root.schema.class_count) if (p := pure(A, i)) is not None]


def branch_zero_entropy(A: AbstractTrainingSet):
    """``(then, else)`` states of the zero-entropy test; ``then`` is ``None`` if infeasible."""
    parts = pure_parts(A)
    then = join_all(A.root, parts) if parts else None
    return then, A


# -- the abstract learner ------------------------------------------------------------


@dataclass(frozen=True)
class Limits:
    timeout_s: float | None = None
    max_disjuncts: int | None = None
    max_memory_bytes: int | None = None


class LimitExceeded(Exception):
    def __init__(self, kind: str):
        super().__init__(kind)
        self.kind = kind


@dataclass
class VerificationOutcome:
    verdict: str  # "robust" or "unknown"
    label: int | None
    candidates: frozenset
    posterior: tuple[Interval, ...]
    terminal_posteriors: list = field(repr=False, default_factory=list)
    elapsed_ms: float = 0.0
    peak_disjuncts: int = 0
    terminals_count: int = 0
    peak_memory_bytes: int = 0
    limit_exceeded: str | None = None
    domain: str = DISJUNCTS
    mode: str = OPTIMAL
    live_counts: list = field(default_factory=list)  # live states after each iteration

    @property
    def robust(self) -> bool:
        return self.verdict == "robust"

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "posterior": [iv.to_json() for iv in self.posterior],
            "posteriorDecimal": [[float(iv.lo), float(iv.hi)] for iv in self.posterior],
            "elapsedMs": round(self.elapsed_ms, 3),
            "peakDisjuncts": self.peak_disjuncts,
            "terminalsCount": self.terminals_count,
            "peakMemoryBytes": self.peak_memory_bytes,
            "domain": self.domain,
            "cprob": self.mode,
        }
        if self.robust:
            out["label"] = self.label
        else:
            out["candidates"] = sorted(self.candidates)
        if self.limit_exceeded:
            out["limitExceeded"] = self.limit_exceeded
        return out


class _Budget:
    def __init__(self, limits: Limits | None):
        self.limits = limits or Limits()
        self.start = time.perf_counter()
        self.peak_disjuncts = 0
        self.peak_memory = 0

    def check(self, live: int, stored: int, bytes_per_state: int):
        lim = self.limits
        self.peak_disjuncts = max(self.peak_disjuncts, live)
        mem = (live + stored) * bytes_per_state
        self.peak_memory = max(self.peak_memory, mem)
        if lim.timeout_s is not None and time.perf_counter() - self.start > lim.timeout_s:
            raise LimitExceeded("timeout")
        if lim.max_disjuncts is not None and live > lim.max_disjuncts:
            raise LimitExceeded("memory")
        if lim.max_memory_bytes is not None and mem > lim.max_memory_bytes:
            raise LimitExceeded("memory")

    @property
    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.start) * 1000


def _dedup(states: Iterable[AbstractTrainingSet]) -> list[AbstractTrainingSet]:
    seen, out = set(), []
    for s in states:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def dtrace_abs(A0: AbstractTrainingSet, x: Example, cfg: LearnerConfig | int,
               domain: str = DISJUNCTS, mode: str = OPTIMAL,
               limits: Limits | None = None) -> VerificationOutcome:
    """Run the trace learner abstractly on every training set in ``A0`` at once."""
    if isinstance(cfg, int):
        cfg = LearnerConfig(cfg)
    if domain not in (BOX, DISJUNCTS):
        raise ValueError(f"unknown domain {domain!r}")
    if A0.size < 1:
        raise ValueError("abstract learning needs a non-empty training set")
    budget = _Budget(limits)
    state_bytes = A0.mask.nbytes + 128
    k = A0.root.schema.class_count
    live = [A0]
    counts = [1]
    terminals: list[AbstractTrainingSet] = []
    try:
        budget.check(len(live), 0, state_bytes)
        for _ in range(cfg.depth):
            nxt: list[AbstractTrainingSet] = []
            for A in live:
                # ent(T) = 0: the pure concretizations stop here, the else branch keeps A
                parts = pure_parts(A)
                if parts:
                    terminals.extend(parts if domain == DISJUNCTS else [join_all(A.root, parts)])
                preds = best_split_abs(A, mode)
                if NULL in preds:
                    terminals.append(A)
                    preds = preds - {NULL}
                if preds:
                    branches = filter_branches(A, preds, x)
                    nxt.extend(branches if domain == DISJUNCTS else [join_all(A.root, branches)])
                budget.check(len(live) + len(nxt), len(terminals), state_bytes)
            if domain == BOX:
                live = [join_all(A0.root, nxt)] if nxt else []
            else:
                live = _dedup(nxt)
            counts.append(len(live))
            budget.check(len(live), len(terminals), state_bytes)
            if not live:
                break
        terminals.extend(live)
        terminals = _dedup(terminals)
    except LimitExceeded as exc:
        full = tuple(_UNIT for _ in range(k))
        return VerificationOutcome("unknown", None, frozenset(range(k)), full, [],
                                   budget.elapsed_ms, budget.peak_disjuncts, len(terminals),
                                   budget.peak_memory, exc.kind, domain, mode, counts)

    vectors = [cprob_abs(t, mode) for t in terminals]
    posterior = vectors[0]
    for v in vectors[1:]:
        posterior = join_vectors(posterior, v)
    candidates = frozenset().union(*(possible_argmax(v) for v in vectors))
    if domain == BOX:
        label = dominates(posterior)
    else:
        winners = {dominates(v) for v in vectors}
        label = winners.pop() if len(winners) == 1 else None
    verdict = "robust" if label is not None else "unknown"
    return VerificationOutcome(verdict, label, candidates, posterior, vectors,
                               budget.elapsed_ms, budget.peak_disjuncts, len(terminals),
                               budget.peak_memory, None, domain, mode, counts)


def verify(T: TrainingSet, x: Example, n: int, cfg: LearnerConfig | int,
           domain: str = DISJUNCTS, mode: str = OPTIMAL,
           limits: Limits | None = None) -> VerificationOutcome:
    """Try to prove that removing any ``n`` training elements cannot change the label of ``x``."""
    if isinstance(cfg, int):
        cfg = LearnerConfig(cfg)
    if len(T) < 1:
        raise ValueError("cannot verify against an empty training set")
    if not 0 <= n <= len(T):
        raise ValueError(f"n={n} must lie in [0, {len(T)}]")
    out = dtrace_abs(AbstractTrainingSet.from_set(T, n), x, cfg, domain, mode, limits)
    if out.robust:
        concrete = dtrace(T, x, cfg).label
        if concrete != out.label:
            raise AssertionError(f"abstract label {out.label} disagrees with concrete label {concrete}")
    return out
