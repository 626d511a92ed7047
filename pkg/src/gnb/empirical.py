"""Maximum-likelihood distributions over column subsets and information measures in bits."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .data import DiscreteTable

VarSet = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class EmpiricalDist:
    """Sparse joint distribution; only cells with positive mass are stored."""

    vars: VarSet
    cells: Mapping[tuple[int, ...], float]
    n_source_rows: int = 0

    def __post_init__(self):
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"repeated variable in {self.vars}")

    def prob(self, assignment: tuple[int, ...]) -> float:
        return self.cells.get(assignment, 0.0)

    def __len__(self):
        return len(self.cells)


def _keys(table: DiscreteTable, vars: Sequence[int]) -> tuple[np.ndarray, int]:
    """Mixed-radix key per row and the size of the key space."""
    codes = table.codes
    key = np.zeros(table.n_rows, dtype=np.int64)
    size = 1
    for v in vars:
        k = table.cardinalities[v]
        key = key * k + codes[:, v]
        size *= k
    return key, size


def counts(table: DiscreteTable, vars: Sequence[int]) -> np.ndarray:
    """Occurrence counts of the observed value combinations (zeros dropped)."""
    key, size = _keys(table, vars)
    if size <= 1 << 20:
        c = np.bincount(key, minlength=size)
        return c[c > 0]
    return np.unique(key, return_counts=True)[1]


def entropy_of_counts(c: np.ndarray) -> float:
    n = c.sum()
    if n == 0:
        return 0.0
    c = c.astype(float)
    return float(math.log2(n) - (c * np.log2(c)).sum() / n)


def estimate(table: DiscreteTable, vars: Iterable[int]) -> EmpiricalDist:
    """Relative frequency of every observed value tuple of ``vars``."""
    vars = tuple(vars)
    if not vars:
        raise ValueError("empty variable set")
    if table.n_rows == 0:
        raise ValueError("empty table")
    for v in vars:
        if not 0 <= v < table.n_columns:
            raise ValueError(f"variable {v} out of range")
    sub = table.codes[:, list(vars)]
    uniq, cnt = np.unique(sub, axis=0, return_counts=True)
    n = table.n_rows
    cells = {tuple(int(x) for x in row): int(c) / n for row, c in zip(uniq, cnt)}
    return EmpiricalDist(vars, cells, n)


def marginalize(dist: EmpiricalDist, sub: Iterable[int]) -> EmpiricalDist:
    sub = tuple(sub)
    if not set(sub) <= set(dist.vars):
        raise ValueError(f"{sub} is not a subset of {dist.vars}")
    pos = [dist.vars.index(v) for v in sub]
    out: dict[tuple[int, ...], float] = defaultdict(float)
    for cell, p in dist.cells.items():
        out[tuple(cell[i] for i in pos)] += p
    return EmpiricalDist(sub, dict(out), dist.n_source_rows)


def entropy(dist: EmpiricalDist) -> float:
    return float(-sum(p * math.log2(p) for p in dist.cells.values()))


def info_content(dist: EmpiricalDist) -> float:
    """Sum over cells of p * log2(p / prod of univariate marginals)."""
    if len(dist.vars) < 2:
        raise ValueError("information content needs at least two variables")
    margins = [marginalize(dist, (v,)).cells for v in dist.vars]
    total = 0.0
    for cell, p in dist.cells.items():
        denom = 1.0
        for m, x in zip(margins, cell):
            denom *= m[(x,)]
        total += p * math.log2(p / denom)
    return total


class Entropies:
    """Memoised joint entropies of column subsets of one table."""

    def __init__(self, table: DiscreteTable):
        self.table = table
        self._cache: dict[VarSet, float] = {}

    def H(self, vars: Iterable[int]) -> float:
        key = tuple(sorted(vars))
        h = self._cache.get(key)
        if h is None:
            h = self._cache[key] = entropy_of_counts(counts(self.table, key)) if key else 0.0
        return h

    def info(self, vars: Sequence[int]) -> float:
        """Information content via sum of marginal entropies minus joint entropy."""
        return sum(self.H((v,)) for v in vars) - self.H(vars)

    def cond_mutual_info(self, a: int, b: int, given: int) -> float:
        return self.H((a, given)) + self.H((b, given)) - self.H((given,)) - self.H((a, b, given))


def structure_weight_nb(table: DiscreteTable, attributes: Sequence[int] | None = None,
                        ent: Entropies | None = None) -> float:
    """Sum of I(Y, X_i) over the attributes."""
    ent = ent or Entropies(table)
    y = table.class_column
    attributes = table.attributes if attributes is None else attributes
    return sum(ent.info((y, i)) for i in attributes)


def structure_weight_gnb(table: DiscreteTable, structure, ent: Entropies | None = None) -> float:
    """I(Y, X_i1, X_i2) plus I(Y, X_mu, X_k) - I(Y, X_mu) for every later attachment."""
    ent = ent or Entropies(table)
    y = structure.class_index
    if y != table.class_column:
        raise ValueError("structure and table disagree on the class column")
    for a in structure.order:
        if not 0 <= a < table.n_columns or a == y:
            raise ValueError(f"structure references unknown attribute {a}")
    order = structure.order
    w = ent.info((y, order[0], order[1]))
    for k in order[2:]:
        m = structure.mother[k]
        w += ent.info((y, m, k)) - ent.info((y, m))
    return w


def kl_divergence(p: EmpiricalDist, q: Callable[[tuple[int, ...]], float]) -> float:
    """Sum over the support of p of p * log2(p / q); q takes a full assignment of p.vars."""
    total = 0.0
    for cell, px in p.cells.items():
        qx = q(cell)
        if qx <= 0.0:
            raise ValueError(f"q vanishes on {cell} where p = {px}: not absolutely continuous")
        total += px * math.log2(px / qx)
    return total
