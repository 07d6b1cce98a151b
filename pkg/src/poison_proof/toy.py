"""Small hand-made datasets used in demos, tests and the CLI."""
from __future__ import annotations

from .dataset import Example, FeatureSchema, TrainingSet

WHITE, BLACK = 0, 1

# one real feature; blacks sit at both ends and at 4, whites fill 1..3 and 7..10
_BLACKS = (0, 4, 11, 12, 13, 14)
_WHITES = (1, 2, 3, 7, 8, 9, 10)


def black_white() -> TrainingSet:
    """Thirteen one-dimensional points, 7 white and 6 black, sorted by value."""
    schema = FeatureSchema(("x",), ("white", "black"))
    rows = sorted([(v, BLACK) for v in _BLACKS] + [(v, WHITE) for v in _WHITES])
    return TrainingSet.from_examples(schema, [Example((v,), y) for v, y in rows])


def point(value) -> Example:
    return Example((value,))
