"""Strategies and small builders shared by the property tests."""
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from poison_proof.dataset import Example, FeatureSchema, TrainingSet
from poison_proof.domain import AbstractTrainingSet


def make_set(rows, k=2):
    """``rows`` are (features tuple, label) pairs."""
    f = len(rows[0][0]) if rows else 1
    schema = FeatureSchema.simple(f, [f"c{i}" for i in range(k)])
    return TrainingSet.from_examples(schema, [Example(x, y) for x, y in rows])


def one_dim(values, labels, k=2):
    return make_set([((v,), y) for v, y in zip(values, labels)], k)


@st.composite
def small_sets(draw, max_size=8, max_features=2, max_classes=3, max_value=5):
    f = draw(st.integers(1, max_features))
    k = draw(st.integers(2, max_classes))
    size = draw(st.integers(1, max_size))
    rows = [(tuple(draw(st.integers(0, max_value)) for _ in range(f)), draw(st.integers(0, k - 1)))
            for _ in range(size)]
    return make_set(rows, k)


@st.composite
def abstract_sets(draw, max_size=8, max_n=3, **kw):
    """A training set, a sub-base of it and a slack."""
    T = draw(small_sets(max_size=max_size, **kw))
    mask = np.array(draw(st.lists(st.booleans(), min_size=len(T), max_size=len(T))))
    size = int(mask.sum())
    n = draw(st.integers(0, min(max_n, size)))
    return AbstractTrainingSet(T, mask, n)


def mask_of(A, removed=()):
    m = A.mask.copy()
    for j in removed:
        m[j] = False
    return m


def members(A):
    """Every concretization of ``A`` as a training set."""
    from itertools import combinations
    pos = np.flatnonzero(A.mask)
    for r in range(A.n + 1):
        for gone in combinations(pos, r):
            yield A.root.subset(mask_of(A, gone))


def half_points(max_value):
    return st.fractions(min_value=-1, max_value=max_value + 1).map(lambda q: Fraction(round(q * 2), 2))
