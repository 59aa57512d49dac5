"""Structure and weight recovery metrics.

All structural metrics work on supports (``!= 0``); thresholding happens
upstream. A predicted edge pointing the wrong way counts once in SHD and as
a false discovery.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DimensionMismatchError, ZeroTruthError


@dataclass(frozen=True)
class MetricReport:
    shd: int
    fdr: float
    tpr: float
    nmse: float
    tp: int
    fp: int
    fn: int
    reversed: int

    def as_dict(self) -> dict:
        return asdict(self)


def _supports(a_hat, a_true):
    a_hat = np.asarray(a_hat)
    a_true = np.asarray(a_true)
    if a_hat.shape != a_true.shape or a_hat.ndim != 2 or a_hat.shape[0] != a_hat.shape[1]:
        raise DimensionMismatchError(f"shapes {a_hat.shape} and {a_true.shape} differ or are not square")
    return a_hat != 0, a_true != 0


def shd(a_hat, a_true) -> int:
    """Structural Hamming distance: node pairs whose edge state differs.

    For DAG supports this is the number of insertions, deletions and
    reversals needed to turn one graph into the other.
    """
    est, true = _supports(a_hat, a_true)
    diff = est != true
    pair_diff = np.triu(diff | diff.T, k=1)
    return int(pair_diff.sum())


def _counts(est, true):
    skel_true = true | true.T
    tp = int((est & true).sum())
    rev = int((est & ~true & true.T).sum())
    fp = int((est & ~skel_true).sum())
    skel_est = est | est.T
    fn = int((true & ~skel_est).sum())
    return tp, fp, fn, rev


def fdr_tpr(a_hat, a_true) -> tuple[float, float]:
    """``FDR = (FP + reversed) / max(1, #predicted)``, ``TPR = TP / max(1, #true)``."""
    est, true = _supports(a_hat, a_true)
    tp, fp, _, rev = _counts(est, true)
    fdr = (fp + rev) / max(1, int(est.sum()))
    tpr = tp / max(1, int(true.sum()))
    return float(fdr), float(tpr)


def nmse(a_hat, a_true) -> float:
    """``||A_hat - A||_F^2 / ||A||_F^2``."""
    a_hat = np.asarray(a_hat, dtype=float)
    a_true = np.asarray(a_true, dtype=float)
    if a_hat.shape != a_true.shape:
        raise DimensionMismatchError(f"shapes {a_hat.shape} and {a_true.shape} differ")
    denom = float(np.sum(a_true ** 2))
    if denom == 0:
        raise ZeroTruthError("NMSE is undefined for an all-zero ground truth")
    return float(np.sum((a_hat - a_true) ** 2) / denom)


def evaluate(a_hat, a_true) -> MetricReport:
    """All metrics at once; NMSE is NaN when the ground truth has no edges."""
    est, true = _supports(a_hat, a_true)
    tp, fp, fn, rev = _counts(est, true)
    fdr, tpr = fdr_tpr(a_hat, a_true)
    try:
        err = nmse(a_hat, a_true)
    except ZeroTruthError:
        err = float("nan")
    return MetricReport(shd=shd(a_hat, a_true), fdr=fdr, tpr=tpr, nmse=err,
                        tp=tp, fp=fp, fn=fn, reversed=rev)
