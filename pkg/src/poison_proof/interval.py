"""Closed intervals with exact rational endpoints."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dataset import to_fraction


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __init__(self, lo, hi=None):
        lo = to_fraction(lo)
        hi = lo if hi is None else to_fraction(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def hull(cls, values) -> Interval:
        """Smallest interval containing every value (the interval abstraction of a set)."""
        values = [to_fraction(v) for v in values]
        if not values:
            raise ValueError("hull of an empty set")
        return cls(min(values), max(values))

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    def within(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def join(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    __or__ = join

    def meet(self, other: Interval) -> Interval | None:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def __add__(self, other):
        other = _lift(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other)
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _lift(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError(f"interval division by {other}, which contains 0")
        return self * Interval(1 / other.hi, 1 / other.lo)

    def to_json(self) -> list[str]:
        return [rational_str(self.lo), rational_str(self.hi)]


def _lift(value) -> Interval:
    return value if isinstance(value, Interval) else Interval(value)


def rational_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def iv_join(a: Interval, b: Interval) -> Interval:
    return a.join(b)


def iv_arith(a: Interval, b: Interval, op: str) -> Interval:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown interval operation {op!r}")


def iv_div(a: Interval, b: Interval) -> Interval:
    return a / b


def dominates(vector: Sequence[Interval]) -> int | None:
    """Class whose lower bound strictly exceeds every other class's upper bound."""
    for i, iv in enumerate(vector):
        if all(iv.lo > other.hi for j, other in enumerate(vector) if j != i):
            return i
    return None


def possible_argmax(vector: Sequence[Interval]) -> set[int]:
    """Classes that can be a (tied) maximum for some point of the box."""
    out = set()
    for i, iv in enumerate(vector):
        if all(iv.hi >= other.lo for j, other in enumerate(vector) if j != i):
            out.add(i)
    return out


def join_vectors(a: Sequence[Interval], b: Sequence[Interval]) -> tuple[Interval, ...]:
    if len(a) != len(b):
        raise ValueError("interval vectors of different length")
    return tuple(x.join(y) for x, y in zip(a, b))
