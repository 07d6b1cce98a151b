"""Abstract training sets <T, n> and the predicates that act on them.

An :class:`AbstractTrainingSet` ``<T, n>`` stands for every subset of ``T``
obtained by removing at most ``n`` elements.  ``T`` is stored as a boolean
mask over the root training set, so set differences are computed on element
identity, never on feature values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Union

import numpy as np

from .dataset import Example, TrainingSet, to_fraction


class Truth(enum.Enum):
    TRUE = "true"
    MAYBE = "maybe"
    FALSE = "false"


@dataclass(frozen=True, order=True)
class Threshold:
    """The predicate ``x[feature] <= threshold``."""

    feature: int
    threshold: Fraction

    def __post_init__(self):
        object.__setattr__(self, "threshold", to_fraction(self.threshold))

    def holds(self, x: Example) -> bool:
        return x.features[self.feature] <= self.threshold

    def evaluate(self, x: Example) -> Truth:
        return Truth.TRUE if self.holds(x) else Truth.FALSE

    def mask(self, T: TrainingSet, positive: bool = True) -> np.ndarray:
        """Which elements of ``T`` satisfy the predicate (or its negation)."""
        sat = T.codes[:, self.feature] <= T.level_cut(self.feature, self.threshold)
        return sat if positive else ~sat

    def __str__(self):
        return f"x[{self.feature}] <= {self.threshold}"


@dataclass(frozen=True, order=True)
class SymbolicThreshold:
    """``x[feature] <= [lower, upper)``: stands for every threshold in ``[lower, upper)``.

    Evaluation on a point is three-valued: true if ``x <= lower``, false if
    ``x >= upper`` and maybe in between.
    """

    feature: int
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lower", to_fraction(self.lower))
        object.__setattr__(self, "upper", to_fraction(self.upper))
        if not self.lower < self.upper:
            raise ValueError(f"symbolic threshold needs lower < upper, got [{self.lower}, {self.upper})")

    def evaluate(self, x: Example) -> Truth:
        v = x.features[self.feature]
        if v <= self.lower:
            return Truth.TRUE
        if v >= self.upper:
            return Truth.FALSE
        return Truth.MAYBE

    def covers(self, phi: Threshold) -> bool:
        return phi.feature == self.feature and self.lower <= phi.threshold < self.upper

    def __str__(self):
        return f"x[{self.feature}] <= [{self.lower},{self.upper})"


class _Null:
    """The null predicate: no non-trivial split exists."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NULL"

    __str__ = __repr__

    def __reduce__(self):
        return (_Null, ())


NULL = _Null()

Predicate = Union[Threshold, SymbolicThreshold]


class AbstractTrainingSet:
    """``<T, n>``: all subsets of ``T`` with at most ``n`` elements removed."""

    def __init__(self, root: TrainingSet, mask: np.ndarray, n: int):
        if root.root is not root:
            raise ValueError("AbstractTrainingSet needs the root training set; use from_set")
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (len(root),):
            raise ValueError("mask must cover every root element")
        n = int(n)
        size = int(np.count_nonzero(mask))
        if not 0 <= n <= size:
            raise ValueError(f"slack {n} outside [0, {size}]")
        self.root = root
        self.mask = mask
        self.n = n
        self._size = size

    @classmethod
    def from_set(cls, T: TrainingSet, n: int) -> AbstractTrainingSet:
        return cls(T.root, T.root_mask(), n)

    @classmethod
    def empty(cls, root: TrainingSet) -> AbstractTrainingSet:
        """``<{}, 0>``: the result of joining nothing."""
        return cls(root.root, np.zeros(len(root.root), dtype=bool), 0)

    # -- accessors ------------------------------------------------------------

    @property
    def size(self) -> int:
        return self._size

    @cached_property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.root.labels[self.mask], minlength=self.root.schema.class_count)

    @cached_property
    def base(self) -> TrainingSet:
        return self.root.subset(self.mask)

    @property
    def ids(self) -> np.ndarray:
        return self.root.ids[self.mask]

    @cached_property
    def _key(self):
        return (id(self.root), self.mask.tobytes(), self.n)

    def __eq__(self, other):
        return isinstance(other, AbstractTrainingSet) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"<|T|={self.size}, n={self.n}>"

    def to_json(self) -> dict:
        return {"baseIds": [int(i) for i in self.ids], "n": self.n}

    def is_empty_base(self) -> bool:
        return self.size == 0

    def contains_empty(self) -> bool:
        """Whether the empty training set is a concretization (``n == |T|``)."""
        return self.n == self.size

    def _check(self, other: AbstractTrainingSet):
        if other.root is not self.root:
            raise ValueError("abstract training sets over different roots")

    # -- lattice ------------------------------------------------------------------

    def leq(self, other: AbstractTrainingSet) -> bool:
        self._check(other)
        if np.any(self.mask & ~other.mask):
            return False
        return self.n <= other.n - int(np.count_nonzero(other.mask & ~self.mask))

    __le__ = leq

    def join(self, other: AbstractTrainingSet) -> AbstractTrainingSet:
        self._check(other)
        a_minus_b = int(np.count_nonzero(self.mask & ~other.mask))
        b_minus_a = int(np.count_nonzero(other.mask & ~self.mask))
        mask = self.mask | other.mask
        n = max(a_minus_b + other.n, b_minus_a + self.n)
        return AbstractTrainingSet(self.root, mask, min(n, int(np.count_nonzero(mask))))

    __or__ = join

    def meet(self, other: AbstractTrainingSet) -> AbstractTrainingSet | None:
        """Greatest lower bound; ``None`` is the empty concretization (bottom)."""
        self._check(other)
        a_minus_b = int(np.count_nonzero(self.mask & ~other.mask))
        b_minus_a = int(np.count_nonzero(other.mask & ~self.mask))
        if a_minus_b > self.n or b_minus_a > other.n:
            return None
        return AbstractTrainingSet(self.root, self.mask & other.mask,
                                   min(self.n - a_minus_b, other.n - b_minus_a))

    # -- restriction --------------------------------------------------------------

    def _restrict_mask(self, sat: np.ndarray) -> AbstractTrainingSet:
        mask = self.mask & sat
        return AbstractTrainingSet(self.root, mask, restricted_slack(self.n, int(np.count_nonzero(mask))))

    def restrict(self, phi: Predicate, positive: bool = True) -> AbstractTrainingSet:
        """Keep the elements satisfying ``phi`` (``positive``) or its negation."""
        if isinstance(phi, SymbolicThreshold):
            return self.restrict_symbolic(phi, positive)
        return self._restrict_mask(phi.mask(self.root, positive))

    def restrict_symbolic(self, rho: SymbolicThreshold, positive: bool = True) -> AbstractTrainingSet:
        """Sound restriction for every concrete threshold in ``[lower, upper)``.

        Positive: join of the restrictions by ``x <= lower`` and ``x < upper``.
        Negative: join of the restrictions by ``x > lower`` and ``x >= upper``.
        """
        codes = self.root.codes[:, rho.feature]
        at_lower = codes <= self.root.level_cut(rho.feature, rho.lower)
        below_upper = codes <= self.root.level_cut(rho.feature, rho.upper, strict=True)
        if positive:
            return self._restrict_mask(at_lower).join(self._restrict_mask(below_upper))
        return self._restrict_mask(~at_lower).join(self._restrict_mask(~below_upper))

    # -- concretization -----------------------------------------------------------

    def gamma_contains(self, T: TrainingSet) -> bool:
        if T.root is not self.root:
            raise ValueError("training set from a different root")
        sub = T.root_mask()
        if np.any(sub & ~self.mask):
            return False
        return int(np.count_nonzero(self.mask & ~sub)) <= self.n

    def gamma_count(self) -> int:
        return gamma_count(self.size, self.n)


def restricted_slack(n: int, size: int) -> int:
    """Slack left after restricting to ``size`` elements: at most that many can still go."""
    return min(n, size)


def gamma_count(size: int, n: int) -> int:
    """Number of training sets obtained from ``size`` elements by removing at most ``n``."""
    return sum(math.comb(size, i) for i in range(n + 1))


def join_all(root: TrainingSet, items: Iterable[AbstractTrainingSet]) -> AbstractTrainingSet:
    """Join of ``items``; an empty join gives ``<{}, 0>``.

    The fold starts from the first item rather than from ``<{}, 0>``: by the
    join formula ``A | <{}, 0>`` has slack ``|A|``, not ``A``'s slack.
    """
    out = None
    for a in items:
        out = a if out is None else out.join(a)
    return AbstractTrainingSet.empty(root) if out is None else out

