"""CSV ingestion, quantile discretization and seeded train/test splits.

Continuous columns with more than five distinct values are cut at the
20/40/60/80 percent nearest-rank order statistics and each interval is
represented by the mean of its members.  Everything else passes through
unchanged and is coded by value.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MISSING = frozenset({"", "?", "NA"})
MAX_DISTINCT = 5
N_QUANTILES = 4
# numpy.random.Generator(PCG64); the generator family is part of the split contract
SPLIT_RNG = "numpy.PCG64/v1"
DISCRETIZATION_SCHEMA = 1

Value = Union[float, str]


class DataError(ValueError):
    """Raised when input data cannot be used as requested."""


@dataclass(frozen=True)
class RawTable:
    column_names: tuple[str, ...]
    columns: tuple[tuple[Value, ...], ...]
    numeric: tuple[bool, ...]
    class_column: str | None = None

    def __post_init__(self):
        if len(set(self.column_names)) != len(self.column_names):
            raise DataError("column names must be unique")
        if any(not name for name in self.column_names):
            raise DataError("column names must be non-empty")
        lengths = {len(c) for c in self.columns}
        if len(lengths) > 1:
            raise DataError("ragged columns")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    def column(self, name: str) -> tuple[Value, ...]:
        return self.columns[self.column_names.index(name)]


@dataclass(frozen=True)
class PassThrough:
    """Column kept as-is; ``values[code]`` is the value behind each code."""

    values: tuple[Value, ...]

    @property
    def cardinality(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Binned:
    boundaries: tuple[float, ...]
    representatives: tuple[float, ...]
    global_min: float
    global_max: float

    def __post_init__(self):
        b = self.boundaries
        if any(lo >= hi for lo, hi in zip(b, b[1:])):
            raise DataError("boundaries must be strictly increasing")
        if len(b) > N_QUANTILES:
            raise DataError("at most four boundaries")
        if len(self.representatives) != len(b) + 1:
            raise DataError("need one representative per interval")

    @property
    def cardinality(self) -> int:
        return len(self.representatives)

    @property
    def edges(self) -> tuple[float, ...]:
        return (self.global_min, *self.boundaries, self.global_max)


ColumnRule = Union[PassThrough, Binned]


@dataclass(frozen=True)
class DiscretizationSpec:
    column_names: tuple[str, ...]
    rules: tuple[ColumnRule, ...]

    def rule(self, name: str) -> ColumnRule:
        return self.rules[self.column_names.index(name)]

    def to_dict(self) -> dict:
        cols = []
        for name, rule in zip(self.column_names, self.rules):
            if isinstance(rule, Binned):
                cols.append({
                    "name": name,
                    "rule": "binned",
                    "boundaries": list(rule.boundaries),
                    "representatives": list(rule.representatives),
                    "global_min": rule.global_min,
                    "global_max": rule.global_max,
                })
            else:
                cols.append({"name": name, "rule": "passthrough", "values": list(rule.values)})
        return {"schema_version": DISCRETIZATION_SCHEMA, "columns": cols}

    @classmethod
    def from_dict(cls, doc: dict) -> "DiscretizationSpec":
        if doc.get("schema_version") != DISCRETIZATION_SCHEMA:
            raise DataError(f"unsupported discretization schema {doc.get('schema_version')!r}")
        names, rules = [], []
        for col in doc["columns"]:
            names.append(col["name"])
            if col["rule"] == "binned":
                rules.append(Binned(
                    tuple(col["boundaries"]), tuple(col["representatives"]),
                    col["global_min"], col["global_max"],
                ))
            else:
                rules.append(PassThrough(tuple(col["values"])))
        return cls(tuple(names), tuple(rules))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DiscretizationSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class DiscreteTable:
    """Integer-coded table; row ``r`` column ``j`` is ``codes[r, j]``.

    Code ``-1`` marks a value never seen when the discretization was fitted;
    it only appears in tables built for prediction.
    """

    column_names: tuple[str, ...]
    codes: np.ndarray
    cardinalities: tuple[int, ...]
    class_column: int
    code_labels: tuple[tuple[Value, ...], ...] = field(default=())

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 2 or codes.shape[1] != len(self.column_names):
            raise DataError("codes must be an (n_rows, n_columns) array")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        if not self.code_labels:
            object.__setattr__(self, "code_labels", tuple(tuple(range(k)) for k in self.cardinalities))
        if not 0 <= self.class_column < len(self.column_names):
            raise DataError("class column out of range")
        if self.cardinalities[self.class_column] < 2:
            raise DataError("the class column needs at least two values")
        if len(codes) and (codes >= np.asarray(self.cardinalities)).any():
            raise DataError("code exceeds column cardinality")

    @classmethod
    def from_codes(cls, codes, cardinalities=None, class_column: int = 0, column_names=None) -> "DiscreteTable":
        codes = np.asarray(codes, dtype=np.int64)
        if codes.ndim == 1:
            codes = codes[:, None]
        if cardinalities is None:
            cardinalities = tuple(int(c.max()) + 1 if len(c) else 1 for c in codes.T)
        if column_names is None:
            column_names = tuple("Y" if j == class_column else f"X{j}" for j in range(codes.shape[1]))
        return cls(tuple(column_names), codes, tuple(int(k) for k in cardinalities), class_column)

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    @property
    def n_columns(self) -> int:
        return self.codes.shape[1]

    @property
    def attributes(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n_columns) if j != self.class_column)

    @property
    def class_labels(self) -> tuple[Value, ...]:
        return self.code_labels[self.class_column]

    def take(self, rows) -> "DiscreteTable":
        return DiscreteTable(self.column_names, self.codes[np.asarray(rows, dtype=np.int64)],
                             self.cardinalities, self.class_column, self.code_labels)

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise DataError(f"column {name!r} not found") from None


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, class_column: str | None, missing_markers=DEFAULT_MISSING,
             ignore: Sequence[str] = (), keep_rows: list[int] | None = None) -> RawTable:
    """Read a headed CSV file and drop every row containing a missing marker.

    Columns whose remaining cells all parse as numbers become numeric.
    ``ignore`` names columns (e.g. record ids) that are dropped before the
    missing-value scan.  A ``class_column`` of None reads unlabelled data.
    If ``keep_rows`` is a list, the 0-based numbers of the kept data rows
    are appended to it.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"empty file: {path}") from None
        rows = [[c.strip() for c in r] for r in reader if r]
    if class_column is not None and class_column not in header:
        raise DataError(f"class column not found: {class_column!r}")
    for name in ignore:
        if name not in header:
            raise DataError(f"ignored column not found: {name!r}")
    keep = [j for j, h in enumerate(header) if h not in set(ignore)]
    markers = set(missing_markers)
    complete = []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"data row {i + 1}: expected {len(header)} fields, got {len(row)}")
        cells = [row[j] for j in keep]
        if not any(c in markers for c in cells):
            complete.append(cells)
            if keep_rows is not None:
                keep_rows.append(i)
    dropped = len(rows) - len(complete)
    if dropped:
        log.info("dropped %d of %d rows with missing values", dropped, len(rows))
    if not complete:
        raise DataError("no complete rows remain after dropping missing values")

    names = tuple(header[j] for j in keep)
    columns, numeric = [], []
    for j in range(len(names)):
        cells = [r[j] for r in complete]
        is_num = all(_is_number(c) for c in cells)
        columns.append(tuple(float(c) for c in cells) if is_num else tuple(cells))
        numeric.append(is_num)
    return RawTable(names, tuple(columns), tuple(numeric), class_column)


def nearest_rank_quantiles(values: Sequence[float]) -> list[float]:
    """Q_j = x_(floor(n*j/5)) on the sorted column, 1-based and clamped to [1, n]."""
    xs = sorted(values)
    n = len(xs)
    out = []
    for j in range(1, N_QUANTILES + 1):
        rank = min(max(math.floor(n * j / (N_QUANTILES + 1)), 1), n)
        out.append(xs[rank - 1])
    return out


def fit_column(values: Sequence[Value], numeric: bool, force_passthrough: bool = False) -> ColumnRule:
    distinct = set(values)
    if not numeric:
        return PassThrough(tuple(dict.fromkeys(values)))
    if len(distinct) <= MAX_DISTINCT or force_passthrough:
        return PassThrough(tuple(sorted(distinct)))
    lo, hi = min(values), max(values)
    boundaries = []
    for q in nearest_rank_quantiles(values):
        # equal consecutive quantiles collapse; a cut at the minimum would leave the first interval empty
        if q > lo and (not boundaries or q > boundaries[-1]):
            boundaries.append(q)
    edges = [lo, *boundaries, hi]
    arr = np.asarray(values, dtype=float)
    idx = _interval_index(arr, boundaries)
    reps = tuple(float(arr[idx == s].mean()) for s in range(len(edges) - 1))
    return Binned(tuple(boundaries), reps, lo, hi)


def _interval_index(arr: np.ndarray, boundaries: Sequence[float]) -> np.ndarray:
    # [Q_s, Q_s+1) with the last interval closed on the right
    return np.searchsorted(np.asarray(boundaries, dtype=float), arr, side="right")


def fit_discretization(table: RawTable) -> DiscretizationSpec:
    if table.n_rows == 0:
        raise DataError("cannot fit a discretization on an empty table")
    rules = tuple(
        fit_column(col, num, force_passthrough=(name == table.class_column))
        for name, col, num in zip(table.column_names, table.columns, table.numeric)
    )
    return DiscretizationSpec(table.column_names, rules)


def apply_column(values: Sequence[Value], rule: ColumnRule) -> tuple[np.ndarray, int]:
    """Return (codes, number of clamped cells)."""
    if isinstance(rule, PassThrough):
        index = {v: k for k, v in enumerate(rule.values)}
        return np.array([index.get(v, -1) for v in values], dtype=np.int64), 0
    arr = np.asarray(values, dtype=float)
    clamped = int(((arr < rule.global_min) | (arr > rule.global_max)).sum())
    return _interval_index(arr, rule.boundaries), clamped


def apply_discretization(table: RawTable, spec: DiscretizationSpec, class_column: str | None = None) -> DiscreteTable:
    class_column = class_column or table.class_column
    if class_column not in table.column_names:
        raise DataError(f"class column not found: {class_column!r}")
    missing = [n for n in spec.column_names if n not in table.column_names]
    if missing:
        raise DataError("columns missing from table: " + ", ".join(missing))
    codes, labels, cards = [], [], []
    total_clamped = 0
    for name, rule in zip(spec.column_names, spec.rules):
        col = table.column(name)
        if isinstance(rule, Binned) and not table.numeric[table.column_names.index(name)]:
            raise DataError(f"column {name!r} was numeric when fitted")
        if isinstance(rule, PassThrough) and table.numeric[table.column_names.index(name)]:
            col = tuple(float(v) for v in col)
        c, clamped = apply_column(col, rule)
        total_clamped += clamped
        codes.append(c)
        cards.append(rule.cardinality)
        labels.append(rule.values if isinstance(rule, PassThrough) else rule.representatives)
    if total_clamped:
        log.warning("%d cells outside the fitted range were clamped", total_clamped)
    return DiscreteTable(spec.column_names, np.column_stack(codes), tuple(cards),
                         spec.column_names.index(class_column), tuple(labels))


def discretize(table: RawTable) -> tuple[DiscreteTable, DiscretizationSpec]:
    spec = fit_discretization(table)
    return apply_discretization(table, spec), spec


def join_classes(table: RawTable, rule: str) -> RawTable:
    """Relabel class values, e.g. ``"1,2,3,4=1"`` maps classes 1..4 to 1.

    Several mappings may be separated by ``;``.
    """
    if table.class_column is None:
        raise DataError("table has no class column")
    mapping: dict[str, str] = {}
    for part in rule.split(";"):
        if not part.strip():
            continue
        src, sep, dst = part.partition("=")
        if not sep:
            raise DataError(f"bad --join-classes rule {part!r}")
        for s in src.split(","):
            mapping[normalize_label(s.strip())] = dst.strip()
    j = table.column_names.index(table.class_column)
    old = table.columns[j]
    new = tuple(mapping.get(normalize_label(v), normalize_label(v)) for v in old)
    if table.numeric[j] and all(_is_number(v) for v in new):
        new = tuple(float(v) for v in new)
        numeric = table.numeric
    else:
        numeric = table.numeric[:j] + (False,) + table.numeric[j + 1:]
    columns = table.columns[:j] + (new,) + table.columns[j + 1:]
    return RawTable(table.column_names, columns, numeric, table.class_column)


def normalize_label(v: Value) -> str:
    if isinstance(v, float):
        return format_value(v)
    try:
        return format_value(float(v))
    except ValueError:
        return str(v)


def format_value(v: Value) -> str:
    """Render a code label the way it appeared in the input when possible."""
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def split_indices(n: int, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted (train, test) row indices for a seeded split of ``n`` rows."""
    if not 0 < test_fraction < 1:
        raise DataError("test_fraction must be in (0, 1)")
    if n < 2:
        raise DataError("need at least two rows to split")
    n_test = math.floor(n * test_fraction + 0.5)
    if n_test == 0 or n_test == n:
        raise DataError(f"split of {n} rows at {test_fraction} leaves an empty part")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def split(table: DiscreteTable, test_fraction: float, seed: int) -> tuple[DiscreteTable, DiscreteTable]:
    """Seeded random split; the test part has round(n * test_fraction) rows."""
    train_rows, test_rows = split_indices(table.n_rows, test_fraction, seed)
    return table.take(train_rows), table.take(test_rows)
