#!/usr/bin/env python3
"""Download or rebuild the five benchmark data sets into data/ as headed CSV files.

Usage:
    python scripts/fetch_datasets.py [--only NAME ...] [--offline] [--orange-wheel PATH]

Each data set is first taken from the UCI repository.  Without network
access two of them can be rebuilt locally: Wdbc from the copy bundled with
scikit-learn and Heart Disease (Cleveland) from the copy shipped in the
Orange3 wheel.  Written files are checked against data/SHA256SUMS when an
entry exists; a mismatch is reported but the file is kept.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
import urllib.request
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

DATA = Path(__file__).resolve().parent.parent / "data"
UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

WDBC_FEATURES = [f"{stat}_{name}" for stat in ("mean", "se", "worst") for name in (
    "radius", "texture", "perimeter", "area", "smoothness", "compactness",
    "concavity", "concave_points", "symmetry", "fractal_dimension")]
HEART_COLUMNS = ["age", "sex", "cp", "trestbps", "chol", "fbs", "restecg", "thalach",
                 "exang", "oldpeak", "slope", "ca", "thal", "num"]
THYROID_COLUMNS = ["age", "sex", "on_thyroxine", "query_on_thyroxine", "on_antithyroid_medication",
                   "sick", "pregnant", "thyroid_surgery", "I131_treatment", "query_hypothyroid",
                   "query_hyperthyroid", "lithium", "goitre", "tumor", "hypopituitary", "psych",
                   "TSH", "T3", "TT4", "T4U", "FTI", "class"]
# the binary attribute numbered b14 in the original listing (all but one row equal)
THYROID_B14 = "hypopituitary"


def _get(url: str) -> bytes:
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


def _csv(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def wdbc_uci() -> str:
    text = _get(f"{UCI}/breast-cancer-wisconsin/wdbc.data").decode()
    rows = [r.split(",") for r in text.split()]
    return _csv(["id", "diagnosis", *WDBC_FEATURES], rows)


def wdbc_sklearn() -> str:
    import sklearn

    path = Path(sklearn.__file__).parent / "datasets" / "data" / "breast_cancer.csv"
    lines = path.read_text().splitlines()[1:]
    rows = []
    for i, line in enumerate(lines):
        cells = line.split(",")
        # sklearn codes 0 = malignant, 1 = benign; the record ids are not bundled
        rows.append([str(i + 1), "M" if cells[-1] == "0" else "B", *cells[:-1]])
    return _csv(["id", "diagnosis", *WDBC_FEATURES], rows)


def heart_uci() -> str:
    text = _get(f"{UCI}/heart-disease/processed.cleveland.data").decode()
    rows = [[_tidy(c) for c in line.split(",")] for line in text.splitlines() if line.strip()]
    return _csv(HEART_COLUMNS, rows)


def _tidy(cell: str) -> str:
    cell = cell.strip()
    try:
        v = float(cell)
    except ValueError:
        return cell
    return str(int(v)) if v.is_integer() else cell


HEART_CODES = {
    "gender": {"male": "1", "female": "0"},
    "chest pain": {"typical ang": "1", "atypical ang": "2", "non-anginal": "3", "asymptomatic": "4"},
    "rest ECG": {"normal": "0", "ST-T abnormal": "1", "left vent hypertrophy": "2"},
    "slope peak exc ST": {"upsloping": "1", "flat": "2", "downsloping": "3"},
    "thal": {"normal": "3", "fixed defect": "6", "reversable defect": "7"},
}


def heart_orange(wheel: Path) -> str:
    """Cleveland data from Orange3's heart_disease.tab, recoded to the UCI integer codes.

    That copy already joins the diagnosis values 1-4 into 1.
    """
    with zipfile.ZipFile(wheel) as z:
        text = z.read("Orange/datasets/heart_disease.tab").decode()
    lines = text.splitlines()
    header = lines[0].split("\t")
    rows = []
    for line in lines[3:]:
        if not line.strip():
            continue
        cells = line.split("\t")
        out = []
        for name, cell in zip(header, cells):
            cell = cell.strip() or "?"
            out.append(HEART_CODES[name].get(cell, cell) if name in HEART_CODES and cell != "?" else _tidy(cell))
        rows.append(out)
    return _csv(HEART_COLUMNS, rows)


def parkinson_uci() -> str:
    return _get(f"{UCI}/parkinsons/parkinsons.data").decode().replace("\r\n", "\n")


def diabetes_uci() -> str:
    raw = _get("https://archive.ics.uci.edu/static/public/529/early+stage+diabetes+risk+prediction+dataset.zip")
    with zipfile.ZipFile(io.BytesIO(raw)) as z:
        name = next(n for n in z.namelist() if n.endswith(".csv"))
        return z.read(name).decode().replace("\r\n", "\n")


def thyroid_uci() -> str:
    text = _get(f"{UCI}/thyroid-disease/ann-train.data").decode()
    rows = [[_tidy(c) for c in line.split()] for line in text.splitlines() if line.strip()]
    return _csv(THYROID_COLUMNS, rows)


@dataclass(frozen=True)
class Dataset:
    name: str
    filename: str
    fetch: Callable[[], str]
    offline: Callable[[argparse.Namespace], str] | None = None


DATASETS = [
    Dataset("wdbc", "wdbc.csv", wdbc_uci, lambda a: wdbc_sklearn()),
    Dataset("heart", "heart_cleveland.csv", heart_uci, lambda a: heart_orange(a.orange_wheel)),
    Dataset("parkinson", "parkinsons.csv", parkinson_uci),
    Dataset("diabetes", "diabetes.csv", diabetes_uci),
    Dataset("thyroid", "thyroid_ann_train.csv", thyroid_uci),
]


def _checksums() -> dict[str, str]:
    path = DATA / "SHA256SUMS"
    if not path.exists():
        return {}
    out = {}
    for line in path.read_text().splitlines():
        digest, _, name = line.partition("  ")
        out[name.strip()] = digest
    return out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--only", nargs="*", choices=[d.name for d in DATASETS])
    p.add_argument("--offline", action="store_true", help="skip downloads, rebuild what is possible locally")
    p.add_argument("--orange-wheel", type=Path, default=None, help="Orange3 wheel holding heart_disease.tab")
    args = p.parse_args(argv)
    DATA.mkdir(exist_ok=True)
    sums = _checksums()
    failed = 0
    for ds in DATASETS:
        if args.only and ds.name not in args.only:
            continue
        text, source = None, None
        if not args.offline:
            try:
                text, source = ds.fetch(), "UCI"
            except Exception as exc:  # noqa: BLE001
                print(f"{ds.name}: download failed ({exc})")
        if text is None and ds.offline is not None:
            if ds.name == "heart" and args.orange_wheel is None:
                print("heart: pass --orange-wheel to rebuild offline")
            else:
                text, source = ds.offline(args), "local copy"
        if text is None:
            print(f"{ds.name}: not available")
            failed += 1
            continue
        path = DATA / ds.filename
        path.write_text(text, encoding="utf-8")
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        want = sums.get(ds.filename)
        status = "checksum ok" if want == digest else ("no checksum on file" if want is None else "CHECKSUM MISMATCH")
        print(f"{ds.name}: wrote {path.name} from {source}, sha256 {digest[:16]}..., {status}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
