"""Trace-based decision-tree learner with Gini impurity and midpoint thresholds.

Instead of building a whole tree, :func:`dtrace` follows only the
root-to-leaf path that one input takes.  All arithmetic is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dataset import Example, TrainingSet
from .domain import NULL, Threshold
from .interval import rational_str


@dataclass(frozen=True)
class LearnerConfig:
    depth: int
    # Fixed tie-break: lowest (feature, threshold) for splits, lowest class index for labels.
    tie_break: str = "lowest-index"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be at least 1")


@dataclass
class Trace:
    steps: list[tuple[Threshold, bool]]
    final_set: TrainingSet
    label: int
    posterior: tuple[Fraction, ...]
    stopped: str = "depth"  # "pure", "no-split" or "depth"

    def to_json(self) -> dict:
        return {
            "steps": [str(phi) if pos else f"not {phi}" for phi, pos in self.steps],
            "label": self.label,
            "posterior": [rational_str(p) for p in self.posterior],
            "finalSize": len(self.final_set),
            "stopped": self.stopped,
        }


def cprob(T: TrainingSet) -> tuple[Fraction, ...]:
    if len(T) == 0:
        raise ValueError("cprob of an empty training set")
    return tuple(Fraction(int(c), len(T)) for c in T.class_counts)


def ent(T: TrainingSet) -> Fraction:
    """Gini impurity, sum of p_i (1 - p_i)."""
    return sum((p * (1 - p) for p in cprob(T)), Fraction(0))


def restrict(T: TrainingSet, phi: Threshold, positive: bool = True) -> TrainingSet:
    return T.subset(phi.mask(T, positive))


def _weighted_gini(counts) -> Fraction:
    """``|S| * ent(S)`` from class counts, i.e. ``|S| - sum(c^2) / |S|``."""
    s = int(sum(counts))
    return Fraction(s * s - sum(int(c) ** 2 for c in counts), s)


def score(T: TrainingSet, phi: Threshold) -> Fraction:
    left = T.subset(phi.mask(T, True))
    right = T.subset(phi.mask(T, False))
    if len(left) == 0 or len(right) == 0:
        raise ValueError(f"{phi} splits the training set trivially")
    return _weighted_gini(left.class_counts) + _weighted_gini(right.class_counts)


def level_class_counts(T: TrainingSet, mask: np.ndarray | None = None) -> np.ndarray:
    """Counts per (feature, level code, class) over ``T`` (or its masked part)."""
    codes, labels = T.codes, T.labels
    if mask is not None:
        codes, labels = codes[mask], labels[mask]
    f = T.schema.feature_count
    k = T.schema.class_count
    width = max(len(lv) for lv in T.levels)
    offsets = (np.arange(f, dtype=np.int64) * width)[None, :]
    out = np.zeros((f, width, k), dtype=np.int64)
    for c in range(k):
        rows = codes[labels == c]
        if len(rows):
            out[:, :, c] = np.bincount((rows.astype(np.int64) + offsets).ravel(),
                                       minlength=f * width).reshape(f, width)
    return out


def split_table(T: TrainingSet, mask: np.ndarray | None = None):
    """Enumerate the adjacent-level cuts of every feature.

    Returns ``(features, lower, upper, left_counts)`` where cut ``j`` separates
    values ``<= levels[features[j]][lower[j]]`` from values
    ``>= levels[features[j]][upper[j]]`` and ``left_counts[j]`` holds the
    per-class counts on the lower side.
    """
    counts = level_class_counts(T, mask)
    feats, lo, hi, left = [], [], [], []
    cum = np.cumsum(counts, axis=1)
    present = counts.sum(axis=2) > 0
    for i in range(counts.shape[0]):
        lv = np.flatnonzero(present[i])
        if len(lv) < 2:
            continue
        feats.append(np.full(len(lv) - 1, i))
        lo.append(lv[:-1])
        hi.append(lv[1:])
        left.append(cum[i, lv[:-1], :])
    if not feats:
        k = T.schema.class_count
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, np.zeros((0, k), dtype=np.int64)
    return np.concatenate(feats), np.concatenate(lo), np.concatenate(hi), np.concatenate(left)


def candidate_predicates(T: TrainingSet) -> list[Threshold]:
    """Midpoints between adjacent distinct values of each feature, in (feature, threshold) order."""
    if len(T) == 0:
        raise ValueError("no candidate predicates for an empty training set")
    feats, lo, hi, _ = split_table(T)
    return [Threshold(int(i), (T.levels[i][a] + T.levels[i][b]) / 2)
            for i, a, b in zip(feats, lo, hi)]


def best_split(T: TrainingSet):
    """Lowest-score non-trivial threshold, or ``NULL`` when every split is trivial."""
    if len(T) == 0:
        raise ValueError("best_split of an empty training set")
    feats, lo, hi, left = split_table(T)
    if len(feats) == 0:
        return NULL
    total = T.class_counts[None, :]
    right = total - left
    # float pre-screen, then exact comparison among near-ties
    approx = _approx_score(left) + _approx_score(right)
    best = approx.min()
    near = np.flatnonzero(approx <= best + 1e-9 * max(1.0, abs(best)))
    exact = [(_weighted_gini(left[j]) + _weighted_gini(right[j]), j) for j in near]
    top = min(s for s, _ in exact)
    j = min(j for s, j in exact if s == top)  # cuts are already in (feature, threshold) order
    i = int(feats[j])
    return Threshold(i, (T.levels[i][lo[j]] + T.levels[i][hi[j]]) / 2)


def _approx_score(counts: np.ndarray) -> np.ndarray:
    s = counts.sum(axis=1).astype(float)
    return s - (counts.astype(float) ** 2).sum(axis=1) / s


def filter_set(T: TrainingSet, phi: Threshold, x: Example) -> TrainingSet:
    """Keep the side of ``phi`` that ``x`` falls on."""
    return restrict(T, phi, phi.holds(x))


def argmax_lowest(values) -> int:
    best = max(values)
    return next(i for i, v in enumerate(values) if v == best)


def dtrace(T: TrainingSet, x: Example, cfg: LearnerConfig | int) -> Trace:
    """Learn the trace that ``x`` follows and classify it."""
    if isinstance(cfg, int):
        cfg = LearnerConfig(cfg)
    if len(T) == 0:
        raise ValueError("cannot learn from an empty training set")
    steps: list[tuple[Threshold, bool]] = []
    stopped = "depth"
    for _ in range(cfg.depth):
        if np.count_nonzero(T.class_counts) == 1:
            stopped = "pure"
            break
        phi = best_split(T)
        if phi is NULL:
            stopped = "no-split"
            break
        side = phi.holds(x)
        T = restrict(T, phi, side)
        steps.append((phi, side))
    post = cprob(T)
    return Trace(steps, T, argmax_lowest(post), post, stopped)


class TraceCache:
    """Memoizes nodes by trace prefix, so classifying many inputs builds each node once."""

    def __init__(self, T: TrainingSet):
        self._nodes: dict[tuple, tuple] = {(): (T, None, False)}

    def _node(self, path: tuple):
        T, phi, expanded = self._nodes[path]
        if not expanded:
            phi = None
            if np.count_nonzero(T.class_counts) > 1:
                split = best_split(T)
                phi = None if split is NULL else split
            self._nodes[path] = (T, phi, True)
        return self._nodes[path]

    def predict(self, x: Example, depth: int) -> int:
        path: tuple = ()
        for _ in range(depth):
            T, phi, _ = self._node(path)
            if phi is None:
                break
            side = phi.holds(x)
            child = path + (side,)
            if child not in self._nodes:
                self._nodes[child] = (restrict(T, phi, side), None, False)
            path = child
        T = self._nodes[path][0]
        return argmax_lowest(T.class_counts.tolist())


def accuracy(train: TrainingSet, test: TrainingSet, depth: int) -> float:
    cache = TraceCache(train)
    hits = sum(cache.predict(test.example(j), depth) == int(test.labels[j]) for j in range(len(test)))
    return hits / len(test) if len(test) else float("nan")
