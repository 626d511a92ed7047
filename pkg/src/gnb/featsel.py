"""Feature importance from learning traces and per-prefix evaluation curves."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .classify import classify_table, fit
from .data import DiscreteTable, split
from .learn import LearnTrace
from .metrics import EvalReport
from .structure import GnbStructure, NbStructure, prefix

IMPORTANCE_COLUMNS = ("rank", "attribute", "mother", "weight_increment", "cumulative_weight")
CURVE_COLUMNS = ("n_triplets", "accuracy", "precision", "recall", "f1", "auc", "n_runs", "seeds")
METRICS = ("accuracy", "precision", "recall", "f1", "auc")


@dataclass(frozen=True)
class ImportanceRow:
    rank: int
    attributes: tuple[int, ...]
    mother: int | None
    weight_increment: float
    cumulative_weight: float


@dataclass(frozen=True)
class ImportanceTable:
    rows: tuple[ImportanceRow, ...]

    def to_csv(self, column_names: Sequence[str] | None = None) -> str:
        def name(a):
            return column_names[a] if column_names else str(a)

        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(IMPORTANCE_COLUMNS)
        for r in self.rows:
            w.writerow([r.rank, "+".join(name(a) for a in r.attributes),
                        "" if r.mother is None else name(r.mother),
                        repr(r.weight_increment), repr(r.cumulative_weight)])
        return out.getvalue()


def stage1_scores(trace: LearnTrace) -> ImportanceTable:
    """Tabulate the trace; the first two attributes share the first triplet's information."""
    if not trace.steps:
        raise ValueError("empty trace")
    rows = []
    for rank, step in enumerate(trace.steps, start=1):
        mother = None if rank == 1 else step.triplet[1]
        rows.append(ImportanceRow(rank, step.attributes, mother, step.increment, step.cumulative))
    return ImportanceTable(tuple(rows))


def default_positive(table: DiscreteTable) -> int:
    """Minority class code (ties go to the larger code)."""
    counts = np.bincount(table.codes[:, table.class_column], minlength=table.cardinalities[table.class_column])
    return int(max(range(len(counts)), key=lambda c: (-counts[c], c)))


def evaluate_model(model, test: DiscreteTable, positive: int, seed: int = 0) -> EvalReport:
    posts = classify_table(model, test)
    preds = [p.predicted_class for p in posts]
    scores = [p.probabilities[positive] for p in posts]
    actuals = test.codes[:, test.class_column]
    return EvalReport.build(preds, actuals, scores, positive, seed)


def mean_metrics(reports: Sequence[EvalReport]) -> dict[str, float]:
    out = {}
    for m in METRICS:
        vals = [getattr(r, m) for r in reports if not math.isnan(getattr(r, m))]
        out[m] = float(np.mean(vals)) if vals else math.nan
    return out


@dataclass(frozen=True)
class CurvePoint:
    n_triplets: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float


@dataclass(frozen=True)
class CurveTable:
    rows: tuple[CurvePoint, ...]
    seeds: tuple[int, ...]
    runs: tuple[tuple[int, int, EvalReport], ...] = field(default=(), repr=False)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        seeds = ";".join(str(s) for s in self.seeds)
        for p in self.rows:
            w.writerow([p.n_triplets, repr(p.accuracy), repr(p.precision), repr(p.recall),
                        repr(p.f1), repr(p.auc), len(self.seeds), seeds])
        return out.getvalue()

    def runs_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("run", "n_triplets", *METRICS))
        for run, k, rep in self.runs:
            w.writerow([run, k, *(repr(getattr(rep, m)) for m in METRICS)])
        return out.getvalue()


StructureSource = Union[GnbStructure, Callable[[DiscreteTable], GnbStructure]]


def stage2_curve(table: DiscreteTable, structure: StructureSource, n_runs: int = 5,
                 test_fraction: float = 0.15, base_seed: int = 0,
                 positive: int | None = None) -> CurveTable:
    """Metrics of every structure prefix (1..m-1 triplets), averaged over seeded splits.

    ``structure`` is either a fixed structure or a learner called on each
    training split.  Run ``r`` uses seed ``base_seed + r``.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    if positive is None:
        positive = default_positive(table)
    seeds = tuple(base_seed + r for r in range(n_runs))
    runs = []
    per_k: dict[int, list[EvalReport]] = {}
    for seed in seeds:
        train, test = split(table, test_fraction, seed)
        s = structure(train) if callable(structure) else structure
        if isinstance(s, NbStructure):
            raise TypeError("curves need a GNB structure")
        for n_attr in range(2, len(s.order) + 1):
            model = fit(train, prefix(s, n_attr))
            rep = evaluate_model(model, test, positive, seed)
            runs.append((seed, n_attr - 1, rep))
            per_k.setdefault(n_attr - 1, []).append(rep)
    rows = tuple(CurvePoint(k, **mean_metrics(per_k[k])) for k in sorted(per_k))
    return CurveTable(rows, seeds, tuple(runs))
