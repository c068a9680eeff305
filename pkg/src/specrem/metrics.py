"""Pixel confusion counts and the four segmentation scores."""
from dataclasses import dataclass

import numpy as np

from .errors import DataError


def _ratio(num, den):
    # 0/0 scores as perfect so empty-vs-empty frames count as correct
    return 1.0 if den == 0 else num / den


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    @property
    def dice(self):
        return _ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn)

    @property
    def accuracy(self):
        return _ratio(self.tp + self.tn, self.total)

    @property
    def specificity(self):
        return _ratio(self.tn, self.tn + self.fp)

    @property
    def precision(self):
        return _ratio(self.tp, self.tp + self.fp)

    def __add__(self, other):
        return MetricsReport(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    def scores(self):
        return {
            "dice": self.dice,
            "accuracy": self.accuracy,
            "specificity": self.specificity,
            "precision": self.precision,
        }


def compute_metrics(pred, gt):
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DataError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = int(pred.size - tp - fp - fn)
    return MetricsReport(tp, fp, fn, tn)


def dice(pred, gt):
    return compute_metrics(pred, gt).dice


def pooled(reports):
    """Sum confusion counts over images; the ratios are then taken on the sums."""
    total = MetricsReport(0, 0, 0, 0)
    for rep in reports:
        total = total + rep
    return total
