"""Fitted GNB models: cherry-junction-tree joints and classification with zero-count backoff."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import (Binned, DataError, DiscreteTable, DiscretizationSpec, PassThrough, RawTable, Value,
                   apply_column, format_value)
from .empirical import EmpiricalDist, estimate
from .structure import GnbStructure, NbStructure, structure_from_dict

MODEL_SCHEMA = 1


@dataclass(frozen=True, eq=False)
class GnbModel:
    structure: GnbStructure | NbStructure
    cluster_tables: tuple[EmpiricalDist, ...]
    separator_tables: tuple[EmpiricalDist, ...]
    pair_tables: Mapping[int, EmpiricalDist]
    univariate_tables: Mapping[int, EmpiricalDist]
    class_prior: EmpiricalDist
    column_names: tuple[str, ...]
    cardinalities: tuple[int, ...]
    code_labels: tuple[tuple[Value, ...], ...]
    discretization: DiscretizationSpec | None = None

    @property
    def class_index(self) -> int:
        return self.structure.class_index

    @property
    def n_classes(self) -> int:
        return self.cardinalities[self.class_index]

    @property
    def class_labels(self) -> tuple[Value, ...]:
        return self.code_labels[self.class_index]

    def to_dict(self) -> dict:
        def dist(d: EmpiricalDist) -> dict:
            cells = [[*cell, p] for cell, p in sorted(d.cells.items())]
            return {"vars": list(d.vars), "n_rows": d.n_source_rows, "cells": cells}

        return {
            "schema_version": MODEL_SCHEMA,
            "column_names": list(self.column_names),
            "cardinalities": list(self.cardinalities),
            "code_labels": [list(v) for v in self.code_labels],
            "structure": self.structure.to_dict(),
            "clusters": [dist(d) for d in self.cluster_tables],
            "separators": [dist(d) for d in self.separator_tables],
            "pairs": [dist(self.pair_tables[a]) for a in sorted(self.pair_tables)],
            "univariate": [dist(self.univariate_tables[a]) for a in sorted(self.univariate_tables)],
            "class_prior": dist(self.class_prior),
            "discretization": self.discretization.to_dict() if self.discretization else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "GnbModel":
        if doc.get("schema_version") != MODEL_SCHEMA:
            raise DataError(f"unsupported model schema {doc.get('schema_version')!r}")

        def dist(d) -> EmpiricalDist:
            return EmpiricalDist(tuple(d["vars"]),
                                 {tuple(int(x) for x in c[:-1]): float(c[-1]) for c in d["cells"]},
                                 int(d["n_rows"]))

        pairs = [dist(d) for d in doc["pairs"]]
        unis = [dist(d) for d in doc["univariate"]]
        disc = doc.get("discretization")
        return cls(
            structure=structure_from_dict(doc["structure"]),
            cluster_tables=tuple(dist(d) for d in doc["clusters"]),
            separator_tables=tuple(dist(d) for d in doc["separators"]),
            pair_tables={d.vars[1]: d for d in pairs},
            univariate_tables={d.vars[0]: d for d in unis},
            class_prior=dist(doc["class_prior"]),
            column_names=tuple(doc["column_names"]),
            cardinalities=tuple(doc["cardinalities"]),
            code_labels=tuple(tuple(v) for v in doc["code_labels"]),
            discretization=DiscretizationSpec.from_dict(disc) if disc else None,
        )

    @classmethod
    def from_json(cls, text: str) -> "GnbModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Posterior:
    probabilities: tuple[float, ...]
    predicted_class: int
    used_fallback: bool = False
    fallback_depth: int = 0


def fit(table: DiscreteTable, structure, discretization: DiscretizationSpec | None = None) -> GnbModel:
    """Maximum-likelihood tables for every cluster, separator, (Y, X_i) pair and X_i."""
    y = table.class_column
    if structure.class_index != y:
        raise ValueError("structure class index does not match the table")
    for a in structure.attributes:
        if not 0 <= a < table.n_columns or a == y:
            raise ValueError(f"structure attribute {a} is not a table attribute")
    if table.n_rows == 0:
        raise ValueError("cannot fit on an empty table")
    cache: dict[tuple[int, ...], EmpiricalDist] = {}

    def est(vars):
        vars = tuple(vars)
        if vars not in cache:
            cache[vars] = estimate(table, vars)
        return cache[vars]

    return GnbModel(
        structure=structure,
        cluster_tables=tuple(est(c) for c in structure.clusters()),
        separator_tables=tuple(est(s) for s in structure.separators()),
        pair_tables={a: est((y, a)) for a in structure.attributes},
        univariate_tables={a: est((a,)) for a in structure.attributes},
        class_prior=est((y,)),
        column_names=table.column_names,
        cardinalities=table.cardinalities,
        code_labels=table.code_labels,
        discretization=discretization,
    )


def _lookup(dist: EmpiricalDist, row: Sequence[int], y: int) -> float:
    # every table looked up here starts with the class variable
    cell = (y, *(int(row[v]) for v in dist.vars[1:]))
    return dist.cells.get(cell, 0.0)


def joint(model: GnbModel, row: Sequence[int], y: int) -> float:
    """Product of cluster probabilities over separator probabilities (with multiplicity).

    ``row`` holds one code per table column; the class entry is ignored.
    """
    num = 1.0
    for d in model.cluster_tables:
        p = _lookup(d, row, y)
        if p == 0.0:
            return 0.0
        num *= p
    den = 1.0
    for d in model.separator_tables:
        den *= _lookup(d, row, y)
    return num / den


def _substituted_joint(model: GnbModel, row: Sequence[int], y: int) -> tuple[float, int]:
    """Joint after replacing zero cluster cells by conditional-independence products.

    A zero (y, x_i) pair becomes P(y) P(x_i); a zero (y, x_i, x_j) triplet becomes
    P(y, x_i) P(y, x_j) / P(y) built from the repaired pairs.  Separators use the
    repaired pairs as well.
    """
    prior = model.class_prior.cells.get((y,), 0.0)
    n_subs = 0
    repaired: dict[int, float] = {}

    def pair(a: int) -> float:
        nonlocal n_subs
        if a not in repaired:
            p = model.pair_tables[a].cells.get((y, int(row[a])), 0.0)
            if p == 0.0:
                p = prior * model.univariate_tables[a].cells.get((int(row[a]),), 0.0)
                n_subs += 1
            repaired[a] = p
        return repaired[a]

    num = 1.0
    for d in model.cluster_tables:
        p = _lookup(d, row, y)
        if p == 0.0:
            attrs = d.vars[1:]
            if len(attrs) == 1:
                p = pair(attrs[0])
            else:
                pa, pb = pair(attrs[0]), pair(attrs[1])
                p = pa * pb / prior if prior > 0 else 0.0
                n_subs += 1
        num *= p
    if num == 0.0:
        return 0.0, n_subs
    den = 1.0
    for d in model.separator_tables:
        if len(d.vars) == 1:
            den *= prior
        else:
            p = _lookup(d, row, y)
            den *= p if p > 0 else pair(d.vars[1])
    return num / den, n_subs


def classify(model: GnbModel, row: Sequence[int]) -> Posterior:
    """Posterior over classes for one coded row.

    If every class has zero joint, zero cluster cells are substituted once and
    the joints recomputed; if they are still all zero the class prior decides.
    """
    k = model.n_classes
    joints = np.array([joint(model, row, y) for y in range(k)])
    total = joints.sum()
    if total > 0:
        probs = joints / total
        return Posterior(tuple(float(p) for p in probs), int(np.argmax(joints)))
    depth = 0
    sub = np.zeros(k)
    for y in range(k):
        sub[y], n = _substituted_joint(model, row, y)
        depth += n
    total = sub.sum()
    if total > 0:
        probs = sub / total
        return Posterior(tuple(float(p) for p in probs), int(np.argmax(sub)), True, depth)
    prior = np.array([model.class_prior.cells.get((y,), 0.0) for y in range(k)])
    return Posterior(tuple(float(p) for p in prior), int(np.argmax(prior)), True, depth)


def score_class_probability(model: GnbModel, row: Sequence[int], positive_class: int) -> float:
    if not 0 <= positive_class < model.n_classes:
        raise ValueError(f"class code {positive_class} outside the class domain")
    return classify(model, row).probabilities[positive_class]


def classify_table(model: GnbModel, table: DiscreteTable) -> list[Posterior]:
    return [classify(model, row) for row in table.codes.tolist()]


def encode_rows(model: GnbModel, raw: RawTable) -> np.ndarray:
    """Code a raw table with the model's discretization; the class column may be absent.

    Columns unknown to the model are ignored.  Unseen values get code -1.
    """
    if model.discretization is None:
        raise DataError("model carries no discretization")
    spec = model.discretization
    problems = []
    for a in model.structure.attributes:
        name = model.column_names[a]
        if name not in raw.column_names:
            problems.append(f"missing column {name!r}")
        elif isinstance(spec.rule(name), Binned) and not raw.numeric[raw.column_names.index(name)]:
            problems.append(f"column {name!r} must be numeric")
    if problems:
        raise DataError("schema mismatch: " + "; ".join(problems))
    codes = np.full((raw.n_rows, len(model.column_names)), -1, dtype=np.int64)
    for j, name in enumerate(model.column_names):
        if name not in raw.column_names:
            continue
        col = raw.column(name)
        rule = spec.rule(name)
        if isinstance(rule, PassThrough) and rule.values and isinstance(rule.values[0], str):
            col = tuple(format_value(v) for v in col)
        codes[:, j] = apply_column(col, rule)[0]
    return codes
