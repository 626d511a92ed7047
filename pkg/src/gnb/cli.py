"""Command-line front end: discretize, train, predict, evaluate and curves.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Data files go to ``--out``; summaries go to standard output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .classify import GnbModel, classify, encode_rows, fit
from .data import (DEFAULT_MISSING, SPLIT_RNG, DataError, DiscreteTable, DiscretizationSpec, RawTable,
                   normalize_label, apply_discretization, fit_discretization, format_value, join_classes,
                   load_csv, split)
from .empirical import Entropies, structure_weight_gnb, structure_weight_nb
from .featsel import default_positive, evaluate_model, mean_metrics, stage1_scores, stage2_curve, METRICS
from .learn import ALGORITHMS, learn, learn_gnb_a, learn_gnb_o, learn_nb, learn_tan, trace_from_structure
from .metrics import CSV_COLUMNS, REPORT_SCHEMA
from .structure import NbStructure

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
GNB_O_NOTE = ("note: GNB-O is optimal among GNB structures that contain the most informative "
              "(Y, X_i, X_j) triplet, which it always includes")
ZERO_NOTE = "note: precision, recall and F1 are reported as 0 when their denominator is 0"

log = logging.getLogger("gnb")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    data: Path
    class_col: str | None
    positive: str | None = None
    algorithms: tuple[str, ...] = ("gnb-a",)
    test_fraction: float = 0.15
    n_runs: int = 5
    base_seed: int = 0
    out: Path = Path(".")
    missing: frozenset[str] = DEFAULT_MISSING
    join: str | None = None
    ignore: tuple[str, ...] = ()

    def __post_init__(self):
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise UsageError(f"unknown algorithm {a!r}; expected one of {', '.join(ALGORITHMS)}")
        if not 0 < self.test_fraction < 1:
            raise UsageError("--test-frac must be in (0, 1)")
        if self.n_runs < 1:
            raise UsageError("--runs must be at least 1")


def _algorithms(text: str) -> tuple[str, ...]:
    if text == "all":
        return ALGORITHMS
    return tuple(a.strip() for a in text.split(",") if a.strip())


def _config(args, default_algos: str = "gnb-a") -> RunConfig:
    return RunConfig(
        data=Path(args.data),
        class_col=getattr(args, "class_col", None),
        positive=getattr(args, "positive", None),
        algorithms=_algorithms(getattr(args, "algo", None) or default_algos),
        test_fraction=getattr(args, "test_frac", 0.15),
        n_runs=getattr(args, "runs", 5),
        base_seed=getattr(args, "seed", 0),
        out=Path(args.out),
        missing=frozenset(args.missing.split(",")) | {""} if args.missing is not None else DEFAULT_MISSING,
        join=getattr(args, "join_classes", None),
        ignore=tuple(n.strip() for n in (args.ignore or "").split(",") if n.strip()),
    )


def _load(cfg: RunConfig) -> tuple[RawTable, DiscreteTable, DiscretizationSpec]:
    raw = load_csv(cfg.data, cfg.class_col, cfg.missing, cfg.ignore)
    if cfg.join:
        raw = join_classes(raw, cfg.join)
    # the discretization is fitted once on the complete data set, before any split
    spec = fit_discretization(raw)
    table = apply_discretization(raw, spec)
    if table.cardinalities[table.class_column] < 2:
        raise DataError("the class column has a single value")
    return raw, table, spec


def _positive(cfg: RunConfig, table: DiscreteTable) -> int:
    labels = [normalize_label(v) for v in table.class_labels]
    if cfg.positive is None:
        return default_positive(table)
    want = normalize_label(cfg.positive)
    if want not in labels:
        raise DataError(f"positive class {cfg.positive!r} not among class labels {', '.join(labels)}")
    return labels.index(want)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _describe(structure, names) -> list[str]:
    y = names[structure.class_index]
    if isinstance(structure, NbStructure):
        return [f"({y}, {names[a]})" for a in structure.order]
    return [f"({y}, {names[m]}, {names[a]})" for m, a in
            ((structure.mother[a], a) for a in structure.order[1:])]


def _learn_with_weight(table: DiscreteTable, algo: str):
    ent = Entropies(table)
    if algo == "gnb-a":
        s, trace = learn_gnb_a(table, ent)
        return s, trace, trace.weight
    if algo == "gnb-o":
        s, trace, w = learn_gnb_o(table, ent)
        return s, trace, w
    if algo == "tan":
        s = learn_tan(table, ent)
        return s, trace_from_structure(s, ent), structure_weight_gnb(table, s, ent)
    s = learn_nb(table)
    return s, None, structure_weight_nb(table, s.order, ent)


# -- commands ---------------------------------------------------------------

def cmd_discretize(args) -> int:
    cfg = _config(args)
    raw, table, spec = _load(cfg)
    _write(cfg.out / "discretization.json", spec.to_json() + "\n")
    rows = [[format_value(table.code_labels[j][c]) for j, c in enumerate(r)] for r in table.codes.tolist()]
    _write(cfg.out / "discretized.csv", _csv_text(table.column_names, rows))
    print(f"{table.n_rows} rows, {table.n_columns} columns")
    for name, k in zip(table.column_names, table.cardinalities):
        print(f"  {name}: {k} values")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    if len(cfg.algorithms) != 1:
        raise UsageError("train takes a single --algo")
    algo = cfg.algorithms[0]
    raw, table, spec = _load(cfg)
    structure, trace, weight = _learn_with_weight(table, algo)
    model = fit(table, structure, spec)
    _write(cfg.out / "model.json", model.to_json() + "\n")
    names = table.column_names
    print(f"{algo}: {len(structure.clusters())} clusters over {len(structure.order)} attributes")
    for line in _describe(structure, names):
        print(f"  {line}")
    print(f"total weight: {weight:.6f} bits")
    if trace is not None:
        _write(cfg.out / "importance.csv", stage1_scores(trace).to_csv(names))
    if algo == "gnb-o":
        print(GNB_O_NOTE)
    return EXIT_OK


def cmd_predict(args) -> int:
    model_path = Path(args.model)
    if not model_path.is_file():
        raise DataError(f"model file not found: {model_path}")
    try:
        model = GnbModel.from_json(model_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"invalid model file {model_path}: {exc}") from None
    missing = frozenset(args.missing.split(",")) | {""} if args.missing is not None else DEFAULT_MISSING
    kept: list[int] = []
    raw = load_csv(args.data, None, missing, keep_rows=kept)
    codes = encode_rows(model, raw)
    labels = [format_value(v) for v in model.class_labels]
    rows = []
    n_fallback = 0
    for idx, row in zip(kept, codes.tolist()):
        post = classify(model, row)
        n_fallback += post.used_fallback
        rows.append([idx, labels[post.predicted_class], *(_fmt(p) for p in post.probabilities),
                     str(post.used_fallback).lower()])
    header = ["row", "predicted", *(f"p_{lab}" for lab in labels), "fallback"]
    _write(Path(args.out) / "predictions.csv", _csv_text(header, rows))
    print(f"{len(rows)} rows classified, {n_fallback} via fallback")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args, default_algos="all")
    raw, table, spec = _load(cfg)
    positive = _positive(cfg, table)
    seeds = [cfg.base_seed + r for r in range(cfg.n_runs)]
    splits = [split(table, cfg.test_fraction, s) for s in seeds]  # shared by every algorithm
    doc = {"schema_version": REPORT_SCHEMA, "data": cfg.data.name, "split_rng": SPLIT_RNG,
           "test_fraction": cfg.test_fraction, "positive_class": format_value(table.class_labels[positive]),
           "seeds": seeds, "algorithms": {}}
    run_rows, mean_rows = [], []
    for algo in cfg.algorithms:
        reports = []
        for seed, (train, test) in zip(seeds, splits):
            model = fit(train, learn(train, algo))
            reports.append(evaluate_model(model, test, positive, seed))
        mean = mean_metrics(reports)
        doc["algorithms"][algo] = {
            "runs": [r.to_dict() for r in reports],
            "mean": {k: (None if math.isnan(v) else v) for k, v in mean.items()},
        }
        run_rows += [[algo, *(_fmt(x) for x in r.csv_row())] for r in reports]
        mean_rows.append([algo, *(_fmt(mean[m]) for m in METRICS)])
    _write(cfg.out / "evaluation.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")
    _write(cfg.out / "evaluation_runs.csv", _csv_text(("algorithm", *CSV_COLUMNS), run_rows))
    _write(cfg.out / "evaluation_mean.csv", _csv_text(("algorithm", *METRICS), mean_rows))
    print(f"{cfg.n_runs} runs, test fraction {cfg.test_fraction}, seeds {seeds[0]}..{seeds[-1]}, "
          f"positive class {doc['positive_class']}")
    print("algorithm  " + "  ".join(f"{m:>9}" for m in METRICS))
    for row in mean_rows:
        print(f"{row[0]:<9}  " + "  ".join(f"{float(v):9.4f}" for v in row[1:]))
    print(ZERO_NOTE)
    return EXIT_OK


def cmd_curves(args) -> int:
    cfg = _config(args)
    for algo in cfg.algorithms:
        if algo not in ("gnb-a", "gnb-o"):
            raise UsageError("curves needs --algo gnb-a or gnb-o")
    raw, table, spec = _load(cfg)
    positive = _positive(cfg, table)
    for algo in cfg.algorithms:
        curve = stage2_curve(table, lambda t, a=algo: learn(t, a), cfg.n_runs, cfg.test_fraction,
                             cfg.base_seed, positive)
        _write(cfg.out / f"curve_{algo}.csv", curve.to_csv())
        _write(cfg.out / f"curve_{algo}_runs.csv", curve.runs_csv())
        print(f"{algo}: {len(curve.rows)} points")
        for p in curve.rows:
            print(f"  {p.n_triplets:3d} triplets  accuracy {p.accuracy:.4f}  auc {p.auc:.4f}")
    print(ZERO_NOTE)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _add_common(p, class_required=True):
    p.add_argument("--data", required=True, help="input CSV with a header row")
    p.add_argument("--class-col", required=class_required, help="name of the class column")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--missing", default=None,
                   help="comma-separated missing-value markers (default: '?,NA' and empty cells)")
    p.add_argument("--ignore", default=None, help="comma-separated columns to drop, e.g. record ids")
    p.add_argument("--join-classes", default=None, help='relabel classes, e.g. "1,2,3,4=1"')


def _add_protocol(p):
    p.add_argument("--positive", default=None, help="positive class label (default: minority class)")
    p.add_argument("--test-frac", type=float, default=0.15, help="test fraction per run (default 0.15)")
    p.add_argument("--runs", type=int, default=5, help="number of seeded runs (default 5)")
    p.add_argument("--seed", type=int, default=0, help="base seed; run r uses seed + r")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gnb", description="Generalized Naive Bayes classifiers.")
    parser.add_argument("--version", action="version", version=f"gnb {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("discretize", help="write the fitted discretization and the coded data")
    _add_common(p)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("train", help="learn a structure on the full data and write the model")
    _add_common(p)
    p.add_argument("--algo", default="gnb-a", help=f"one of {', '.join(ALGORITHMS)}")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify rows with a saved model")
    p.add_argument("--model", required=True, help="model.json written by train")
    p.add_argument("--data", required=True, help="CSV with the model's attribute columns")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--missing", default=None, help="comma-separated missing-value markers")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="seeded train/test comparison of algorithms")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--algo", default="all", help="comma-separated algorithms or 'all'")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("curves", help="metrics per number of triplets")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--algo", default="gnb-a", help="gnb-a, gnb-o or both comma-separated")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"gnb: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="gnb: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gnb: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"gnb: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        print(f"gnb: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
