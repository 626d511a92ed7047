"""Binary confusion-matrix metrics and ROC AUC."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

REPORT_SCHEMA = 1
CSV_COLUMNS = ("seed", "n_test", "tp", "fp", "fn", "tn", "accuracy", "precision", "recall", "f1", "auc")


class UndefinedAUC(ValueError):
    """Only one class is present among the actual labels."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def swapped(self) -> "ConfusionMatrix":
        """The same predictions scored with the other class as positive."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


def confusion(predictions: Sequence, actuals: Sequence, positive) -> ConfusionMatrix:
    if len(predictions) != len(actuals):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(actuals)} actuals")
    if not len(actuals):
        raise ValueError("nothing to evaluate")
    pred = np.asarray(predictions) == positive
    act = np.asarray(actuals) == positive
    return ConfusionMatrix(
        tp=int((pred & act).sum()),
        fp=int((pred & ~act).sum()),
        fn=int((~pred & act).sum()),
        tn=int((~pred & ~act).sum()),
    )


def _ratio(num: float, den: float) -> float:
    # 0/0 is reported as 0 so averages over runs never turn into NaN
    return num / den if den else 0.0


def scores(cm: ConfusionMatrix) -> tuple[float, float, float, float]:
    """(accuracy, precision, recall, f1)."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    return accuracy, precision, recall, f1


def roc_auc(scores: Sequence[float], actuals: Sequence, positive) -> float:
    """Probability that a random positive outscores a random negative, ties counting one half."""
    s = np.asarray(scores, dtype=float)
    pos = np.asarray(actuals) == positive
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUC("AUC needs both classes among the actual labels")
    ranks = rankdata(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    n_test: int
    seed: int

    @classmethod
    def build(cls, predictions, actuals, scores_, positive, seed: int) -> "EvalReport":
        cm = confusion(predictions, actuals, positive)
        acc, prec, rec, f1 = scores(cm)
        try:
            auc = roc_auc(scores_, actuals, positive)
        except UndefinedAUC:
            auc = math.nan
        return cls(cm, acc, prec, rec, f1, auc, cm.total, seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = REPORT_SCHEMA
        if math.isnan(self.auc):
            d["auc"] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> list:
        c = self.confusion
        return [self.seed, self.n_test, c.tp, c.fp, c.fn, c.tn,
                self.accuracy, self.precision, self.recall, self.f1, self.auc]
