"""Scoring a strength matrix against a ground-truth adjacency.

Throughout, a cell is predicted positive iff its strength is strictly
greater than the threshold. ``include_diagonal`` picks the scored cells:
all ``M*M`` or the ``M*M - M`` off-diagonal ones.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .errors import ArgumentError, FormatError
from .gc import read_square_csv


def _as_array(x) -> np.ndarray:
    return np.asarray(getattr(x, "strengths", x), dtype=float)


def _cells(a: np.ndarray, include_diagonal: bool) -> np.ndarray:
    if include_diagonal:
        return a.ravel()
    return a[~np.eye(a.shape[0], dtype=bool)]


def _scored(strengths, truth, include_diagonal):
    s = _as_array(strengths)
    t = np.asarray(truth)
    if s.shape != t.shape or s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ArgumentError(f"shape mismatch: strengths {s.shape} vs truth {t.shape}")
    return _cells(s, include_diagonal), _cells(t, include_diagonal).astype(bool)


def confusion(pred, truth, include_diagonal: bool = True) -> Tuple[int, int, int, int]:
    """Return ``(TP, FP, TN, FN)`` over the scored cells."""
    p, t = _scored(pred, truth, include_diagonal)
    p = p.astype(bool)
    tp = int(np.sum(p & t))
    fp = int(np.sum(p & ~t))
    tn = int(np.sum(~p & ~t))
    fn = int(np.sum(~p & t))
    return tp, fp, tn, fn


def mcc(tp: int, fp: int, tn: int, fn: int) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    if min(tp, fp, tn, fn) < 0:
        raise ArgumentError("confusion counts must be non-negative")
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(den)


def f1_score(tp: int, fp: int, fn: int) -> float:
    den = 2 * tp + fp + fn
    return 2 * tp / den if den else 0.0


def _require_both_classes(t: np.ndarray) -> None:
    if t.all() or not t.any():
        raise ArgumentError("ROC is undefined: truth needs both positive and negative cells")


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> List[Tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.fpr, self.tpr)]


def roc(strengths, truth, include_diagonal: bool = True) -> RocCurve:
    """ROC over every distinct strength, from the empty to the complete graph.

    Tied strengths enter the positive set together, giving one step per
    distinct value. AUC is the trapezoidal area.
    """
    s, t = _scored(strengths, truth, include_diagonal)
    _require_both_classes(t)
    levels = np.unique(s)[::-1]
    # threshold levels[k+1] admits exactly the cells >= levels[k]
    thresholds = np.concatenate([[np.inf], levels[1:], [-np.inf]])
    n_pos, n_neg = t.sum(), (~t).sum()
    fpr = np.array([np.sum((s > tau) & ~t) / n_neg for tau in thresholds])
    tpr = np.array([np.sum((s > tau) & t) / n_pos for tau in thresholds])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, thresholds, auc)


def best_f1_threshold(strengths, truth, include_diagonal: bool = True) -> Tuple[float, float]:
    """Threshold maximising F1; ties go to the smallest threshold.

    Candidates are the midpoints between consecutive distinct strengths plus
    one value below the minimum (everything positive) and one above the
    maximum (nothing positive).
    """
    s, t = _scored(strengths, truth, include_diagonal)
    _require_both_classes(t)
    levels = np.unique(s)
    cands = np.concatenate([[levels[0] - 1.0], (levels[:-1] + levels[1:]) / 2.0, [levels[-1] + 1.0]])
    best_tau, best_f1 = None, -1.0
    for tau in cands:
        p = s > tau
        f1 = f1_score(int(np.sum(p & t)), int(np.sum(p & ~t)), int(np.sum(~p & t)))
        if f1 > best_f1:
            best_tau, best_f1 = float(tau), f1
    return best_tau, best_f1


@dataclass
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    mcc: float
    threshold: float
    auc: float
    include_diagonal: bool
    roc_points: List[Tuple[float, float]] = field(default_factory=list)
    f1: Optional[float] = None

    def to_json(self) -> str:
        d = asdict(self)
        d["roc_points"] = [list(p) for p in self.roc_points]
        return json.dumps(d, indent=2) + "\n"


def evaluate(strengths, truth, threshold: Optional[float] = None, include_diagonal: bool = True):
    """Full report; without ``threshold`` the best-F1 threshold is used.

    Returns ``(report, roc_curve)``.
    """
    curve = roc(strengths, truth, include_diagonal)
    if threshold is None:
        threshold, _ = best_f1_threshold(strengths, truth, include_diagonal)
    pred = (_as_array(strengths) > threshold).astype(int)
    tp, fp, tn, fn = confusion(pred, truth, include_diagonal)
    report = EvalReport(
        tp, fp, tn, fn,
        mcc=mcc(tp, fp, tn, fn),
        threshold=float(threshold),
        auc=curve.auc,
        include_diagonal=include_diagonal,
        roc_points=curve.points,
        f1=f1_score(tp, fp, fn),
    )
    return report, curve


def write_roc_csv(curve: RocCurve, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fpr", "tpr", "threshold"])
        for a, b, tau in zip(curve.fpr, curve.tpr, curve.thresholds):
            w.writerow(["%.17g" % a, "%.17g" % b, "%.17g" % tau])


def read_truth_csv(path):
    """Ground-truth ``M x M`` 0/1 adjacency with a header of names."""
    names, rows = read_square_csv(path)
    a = np.array(rows)
    if not np.isin(a, (0.0, 1.0)).all():
        raise FormatError(f"{path}: ground truth must contain only 0 and 1")
    return names, a.astype(int)
