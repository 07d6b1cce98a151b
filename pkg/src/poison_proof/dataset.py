"""Training data: schema, exact-valued training sets, CSV and MNIST IDX loaders.

Feature values are exact rationals.  Internally a training set stores, per
feature, the sorted tuple of distinct values ("levels") seen in the root set,
and an integer matrix of level codes.  Every subset shares the root's levels,
so threshold tests on training elements reduce to integer comparisons.
"""
from __future__ import annotations

import csv
import gzip
import math
import struct
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

BOOLEAN = "boolean"
REAL = "real"

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

MISSING_TOKENS = frozenset({"", "?", "NA", "nan", "NaN"})


class DatasetError(ValueError):
    """Raised for malformed dataset files or inconsistent data."""


@dataclass(frozen=True)
class FeatureSchema:
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    feature_kinds: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        kinds = tuple(self.feature_kinds) or (REAL,) * len(self.feature_names)
        object.__setattr__(self, "feature_kinds", kinds)
        if len(self.feature_names) < 1:
            raise DatasetError("schema needs at least one feature")
        if len(self.class_names) < 2:
            raise DatasetError("schema needs at least two classes")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DatasetError("feature names must be unique")
        if len(set(self.class_names)) != len(self.class_names):
            raise DatasetError("class names must be unique")
        if len(kinds) != len(self.feature_names):
            raise DatasetError("one feature kind per feature is required")
        if any(k not in (BOOLEAN, REAL) for k in kinds):
            raise DatasetError(f"unknown feature kind in {kinds}")

    @property
    def feature_count(self) -> int:
        return len(self.feature_names)

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    @classmethod
    def simple(cls, feature_count: int, class_names: Sequence[str], kind: str = REAL):
        names = tuple(f"x{i}" for i in range(feature_count))
        return cls(names, tuple(class_names), (kind,) * feature_count)


@dataclass(frozen=True)
class Example:
    """A labeled (or unlabeled, ``label=None``) feature vector."""

    features: tuple[Fraction, ...]
    label: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(to_fraction(v) for v in self.features))


def to_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or ``"p/q"`` string.

    Floats are accepted and converted exactly (their binary value), which is
    only what you want for values such as ``0.5`` or integer pixels.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite feature value {value!r}")
        return Fraction(float(value))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def _code_dtype(max_levels: int):
    if max_levels <= 256:
        return np.uint8
    if max_levels <= 65536:
        return np.uint16
    return np.int32


class TrainingSet:
    """Indexed multiset of labeled examples with stable element ids.

    Subsets created with :meth:`subset` or :meth:`without_ids` keep a
    reference to the root set they were cut from; element identity (the
    position in the root) is what abstract set operations compare.
    """

    def __init__(self, schema: FeatureSchema, levels, codes, labels, ids=None,
                 *, root: TrainingSet | None = None, positions=None, dropped_rows: int = 0):
        self.schema = schema
        self.levels: tuple[tuple[Fraction, ...], ...] = tuple(tuple(lv) for lv in levels)
        self.codes = np.asarray(codes)
        self.labels = np.asarray(labels, dtype=np.int64)
        m = len(self.labels)
        if self.codes.shape != (m, schema.feature_count):
            raise DatasetError(
                f"code matrix shape {self.codes.shape} does not match "
                f"{m} elements x {schema.feature_count} features")
        if m and (self.labels.min() < 0 or self.labels.max() >= schema.class_count):
            raise DatasetError("label out of range for schema")
        self.ids = np.arange(m, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64)
        if root is None:
            if len(set(self.ids.tolist())) != m:
                raise DatasetError("element ids must be unique")
            self.root = self
            self.positions = np.arange(m, dtype=np.int64)
        else:
            self.root = root
            self.positions = np.asarray(positions, dtype=np.int64)
        self.class_counts = np.bincount(self.labels, minlength=schema.class_count)
        self.dropped_rows = dropped_rows

    # -- construction -----------------------------------------------------

    @classmethod
    def from_examples(cls, schema: FeatureSchema, examples: Iterable[Example], ids=None,
                      dropped_rows: int = 0) -> TrainingSet:
        examples = list(examples)
        f = schema.feature_count
        for j, ex in enumerate(examples):
            if len(ex.features) != f:
                raise DatasetError(f"element {j}: expected {f} features, got {len(ex.features)}")
            if ex.label is None or not 0 <= ex.label < schema.class_count:
                raise DatasetError(f"element {j}: label {ex.label!r} outside [0, {schema.class_count})")
            for i, kind in enumerate(schema.feature_kinds):
                if kind == BOOLEAN and ex.features[i] not in (0, 1):
                    raise DatasetError(f"element {j}: boolean feature {i} holds {ex.features[i]}")
        levels = [sorted({ex.features[i] for ex in examples}) for i in range(f)]
        dtype = _code_dtype(max((len(lv) for lv in levels), default=1))
        codes = np.zeros((len(examples), f), dtype=dtype)
        lookup = [{v: r for r, v in enumerate(lv)} for lv in levels]
        for j, ex in enumerate(examples):
            codes[j] = [lookup[i][v] for i, v in enumerate(ex.features)]
        labels = [ex.label for ex in examples]
        return cls(schema, levels, codes, labels, ids, dropped_rows=dropped_rows)

    @classmethod
    def from_arrays(cls, schema: FeatureSchema, values: np.ndarray, labels, ids=None) -> TrainingSet:
        """Build from an integer-valued feature matrix (e.g. pixels) without Fraction churn."""
        values = np.asarray(values)
        if not np.issubdtype(values.dtype, np.integer):
            raise DatasetError("from_arrays requires an integer feature matrix")
        f = schema.feature_count
        if values.ndim != 2 or values.shape[1] != f:
            raise DatasetError(f"expected an (m, {f}) matrix, got {values.shape}")
        uniq = [np.unique(values[:, i]) for i in range(f)]
        dtype = _code_dtype(max((len(u) for u in uniq), default=1))
        codes = np.empty(values.shape, dtype=dtype)
        for i in range(f):
            codes[:, i] = np.searchsorted(uniq[i], values[:, i])
        levels = [tuple(Fraction(int(v)) for v in u) for u in uniq]
        return cls(schema, levels, codes, labels, ids)

    # -- views --------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"TrainingSet(size={len(self)}, classCounts={self.class_counts.tolist()})"

    @property
    def size(self) -> int:
        return len(self.labels)

    def subset(self, selector) -> TrainingSet:
        """Subset by boolean mask or index array (indices into this set)."""
        sel = np.asarray(selector)
        if sel.dtype == bool:
            sel = np.flatnonzero(sel)
        return TrainingSet(self.schema, self.levels, self.codes[sel], self.labels[sel],
                           self.ids[sel], root=self.root, positions=self.positions[sel])

    def without_ids(self, removed: Iterable[int]) -> TrainingSet:
        removed = np.fromiter(removed, dtype=np.int64)
        return self.subset(~np.isin(self.ids, removed))

    def value(self, j: int, feature: int) -> Fraction:
        return self.levels[feature][self.codes[j, feature]]

    def example(self, j: int) -> Example:
        row = self.codes[j]
        feats = tuple(self.levels[i][row[i]] for i in range(self.schema.feature_count))
        return Example(feats, int(self.labels[j]))

    def examples(self) -> Iterator[Example]:
        for j in range(len(self)):
            yield self.example(j)

    def root_mask(self) -> np.ndarray:
        """Boolean mask over the root's elements selecting this subset."""
        mask = np.zeros(len(self.root), dtype=bool)
        mask[self.positions] = True
        return mask

    def level_cut(self, feature: int, threshold: Fraction, strict: bool = False) -> int:
        """Largest level code whose value is ``<= threshold`` (``< threshold`` if strict).

        Returns -1 when no level qualifies.
        """
        lv = self.levels[feature]
        if strict:
            return bisect_left(lv, threshold) - 1
        return bisect_right(lv, threshold) - 1

    def recount(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.schema.class_count)

    def same_elements(self, other: TrainingSet) -> bool:
        """Element-wise equality: ids, labels and exact feature values."""
        if len(self) != len(other) or not np.array_equal(self.ids, other.ids):
            return False
        if not np.array_equal(self.labels, other.labels):
            return False
        return all(self.example(j).features == other.example(j).features for j in range(len(self)))


# -- CSV ------------------------------------------------------------------------


def _format_value(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    # exact decimal when the denominator has only 2s and 5s
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        digits = max(twos, fives)
        scaled = v * 10 ** digits
        sign = "-" if scaled < 0 else ""
        s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
        return f"{sign}{s[:-digits]}.{s[-digits:]}"
    return f"{v.numerator}/{v.denominator}"


def load_csv(path, label_column: str | int = -1, *, header: bool | None = None,
             class_names: Sequence[str] | None = None,
             feature_kinds: Sequence[str] | None = None,
             drop_missing: bool = False) -> TrainingSet:
    """Load a comma-separated file with one label column.

    ``label_column`` is a header name or a column index (negative counts from
    the end).  ``header=None`` sniffs: the first row is a header when any of
    its feature cells fails to parse as a number.  ``class_names`` fixes the
    class order; otherwise classes are numbered in sorted order of their
    tokens.  Rows with missing values (``?``, empty, ``NA``) raise unless
    ``drop_missing`` is set, in which case they are skipped and counted in
    ``TrainingSet.dropped_rows``.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DatasetError(f"{path}: no header and no data; cannot infer a schema")

    ncols = len(rows[0])
    first = [c.strip() for c in rows[0]]
    if isinstance(label_column, str):
        header = True
        if label_column not in first:
            raise DatasetError(f"{path}: label column {label_column!r} not in header {first}")
        label_idx = first.index(label_column)
    else:
        label_idx = label_column % ncols
    if header is None:
        header = any(not _parses(c) for i, c in enumerate(first) if i != label_idx)

    feat_cols = [i for i in range(ncols) if i != label_idx]
    if header:
        names = tuple(first[i] for i in feat_cols)
        body, start = rows[1:], 2
    else:
        names = tuple(f"x{i}" for i in range(len(feat_cols)))
        body, start = rows, 1

    raw = []
    dropped = 0
    for lineno, row in enumerate(body, start=start):
        cells = [c.strip() for c in row]
        if len(cells) != ncols:
            raise DatasetError(f"{path}: row {lineno}: expected {ncols} columns, got {len(cells)}")
        if any(c in MISSING_TOKENS for c in cells):
            if drop_missing:
                dropped += 1
                continue
            raise DatasetError(f"{path}: row {lineno}: missing value")
        try:
            feats = tuple(Fraction(cells[i]) for i in feat_cols)
        except (ValueError, ZeroDivisionError) as exc:
            raise DatasetError(f"{path}: row {lineno}: unparseable number ({exc})") from None
        raw.append((lineno, feats, cells[label_idx]))

    if class_names is None:
        class_names = sorted({tok for _, _, tok in raw})
        if len(class_names) < 2:
            raise DatasetError(f"{path}: need class_names when fewer than two labels occur")
    index = {name: i for i, name in enumerate(class_names)}
    examples = []
    for lineno, feats, tok in raw:
        if tok not in index:
            raise DatasetError(f"{path}: row {lineno}: unknown label {tok!r}")
        examples.append(Example(feats, index[tok]))
    schema = FeatureSchema(names, tuple(class_names), tuple(feature_kinds or ()))
    try:
        return TrainingSet.from_examples(schema, examples, dropped_rows=dropped)
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from None


def _parses(cell: str) -> bool:
    try:
        Fraction(cell)
    except (ValueError, ZeroDivisionError):
        return False
    return True


def write_csv(T: TrainingSet, path, *, with_ids: bool = False) -> None:
    """Write a header plus one row per element; labels as class names.

    ``with_ids=True`` produces the canonical dump (``id,feature...,label``).
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        head = list(T.schema.feature_names) + ["label"]
        w.writerow((["id"] + head) if with_ids else head)
        for j in range(len(T)):
            ex = T.example(j)
            row = [_format_value(v) for v in ex.features] + [T.schema.class_names[ex.label]]
            w.writerow(([int(T.ids[j])] + row) if with_ids else row)


def dump_canonical(T: TrainingSet, path) -> None:
    write_csv(T, path, with_ids=True)


def load_canonical(path, schema: FeatureSchema) -> TrainingSet:
    """Reload a canonical dump, keeping the recorded element ids."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    index = {name: i for i, name in enumerate(schema.class_names)}
    ids, examples = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != schema.feature_count + 2:
            raise DatasetError(f"{path}: row {lineno}: wrong arity")
        ids.append(int(row[0]))
        examples.append(Example(tuple(Fraction(c) for c in row[1:-1]), index[row[-1]]))
    return TrainingSet.from_examples(schema, examples, ids=ids)


# -- MNIST IDX ----------------------------------------------------------------


def _open_maybe_gz(path: Path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    return gzip.open(path, "rb") if head == b"\x1f\x8b" else open(path, "rb")


def read_idx(path, expected_magic: int) -> np.ndarray:
    """Read an IDX file (optionally gzip-compressed) holding unsigned bytes."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: no such file")
    with _open_maybe_gz(path) as fh:
        data = fh.read()
    if len(data) < 8:
        raise DatasetError(f"{path}: truncated IDX header")
    magic = struct.unpack(">I", data[:4])[0]
    if magic != expected_magic:
        raise DatasetError(f"{path}: bad magic number 0x{magic:08x}, expected 0x{expected_magic:08x}")
    ndim = magic & 0xFF
    header_len = 4 + 4 * ndim
    if len(data) < header_len:
        raise DatasetError(f"{path}: truncated IDX header")
    dims = struct.unpack(f">{ndim}I", data[4:header_len])
    count = int(np.prod(dims))
    if len(data) - header_len != count:
        raise DatasetError(f"{path}: payload has {len(data) - header_len} bytes, dims {dims} need {count}")
    return np.frombuffer(data, dtype=np.uint8, offset=header_len).reshape(dims)


def write_idx(path, array: np.ndarray) -> None:
    """Write a uint8 array in IDX format (gzip when the name ends in .gz)."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    magic = 0x00000800 | array.ndim
    payload = struct.pack(">I", magic) + struct.pack(f">{array.ndim}I", *array.shape) + array.tobytes()
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(payload)


def load_mnist_idx(images_path, labels_path, keep_labels: Sequence[int] = (1, 7),
                   binarize: bool = False) -> TrainingSet:
    """Load MNIST digits, keeping ``keep_labels`` (relabeled 0, 1, ... in that order).

    Images are flattened row-major to 784 features.  With ``binarize`` each
    pixel becomes its most significant bit, i.e. ``1`` iff ``pixel >= 128``.
    """
    images = read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.ndim != 3:
        raise DatasetError(f"{images_path}: expected 3 image dimensions, got {images.ndim}")
    if labels.ndim != 1 or len(labels) != len(images):
        raise DatasetError(f"label count {len(labels)} does not match image count {len(images)}")
    keep_labels = tuple(int(d) for d in keep_labels)
    keep = np.isin(labels, keep_labels)
    pixels = images[keep].reshape(int(keep.sum()), -1)
    relabel = np.zeros(256, dtype=np.int64)
    for i, d in enumerate(keep_labels):
        relabel[d] = i
    y = relabel[labels[keep]]
    rows, cols = images.shape[1:]
    names = tuple(f"px_{r}_{c}" for r in range(rows) for c in range(cols))
    kind = BOOLEAN if binarize else REAL
    if binarize:
        pixels = (pixels >= 128).astype(np.uint8)
    schema = FeatureSchema(names, tuple(str(d) for d in keep_labels), (kind,) * len(names))
    return TrainingSet.from_arrays(schema, pixels, y, ids=np.flatnonzero(keep))


def train_test_split(T: TrainingSet, train_fraction=Fraction(4, 5), seed: int = 0):
    """Seeded random partition into ``floor(fraction * |T|)`` and the remainder."""
    frac = to_fraction(train_fraction)
    if not 0 < frac < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n_train = math.floor(frac * len(T))
    order = np.random.default_rng(seed).permutation(len(T))
    return T.subset(np.sort(order[:n_train])), T.subset(np.sort(order[n_train:]))
