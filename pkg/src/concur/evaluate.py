"""Binary classification metrics: positive-class F1 and rank-based AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import UNKNOWN


@dataclass
class EvalResult:
    f1: float
    auc: float | None
    tp: int
    fp: int
    fn: int
    tn: int
    n_eval: int

    def to_dict(self) -> dict:
        return {"f1": self.f1, "auc": self.auc, "tp": self.tp, "fp": self.fp,
                "fn": self.fn, "tn": self.tn, "n_eval": self.n_eval}


def f1_score(predicted, truth) -> float:
    """Positive-class F1 = 2 TP / (2 TP + FP + FN); 0 when the denominator is 0."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth must have equal length")
    tp = int(np.sum((predicted == 1) & (truth == 1)))
    fp = int(np.sum((predicted == 1) & (truth == 0)))
    fn = int(np.sum((predicted == 0) & (truth == 1)))
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def auc(scores, truth) -> float:
    """Mann-Whitney AUC with average ranks for ties.

    Equals the probability that a random positive outscores a random
    negative, counting ties as one half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth)
    if scores.shape != truth.shape:
        raise ValueError("scores and truth must have equal length")
    n_pos = int(np.sum(truth == 1))
    n_neg = int(np.sum(truth == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: both classes must be present")
    n = len(scores)
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(n, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = float(np.sum(ranks[truth == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def evaluate(probs, labels, split, subset: str) -> EvalResult:
    """Score model probabilities on one split subset.

    Hard classes come from the row argmax; AUC uses the positive-class
    probability as score and is None when the subset has a single class.
    """
    if subset not in ("valid", "test"):
        raise ValueError("subset must be 'valid' or 'test'")
    idx = getattr(split, subset)
    if idx.size == 0:
        raise ValueError(f"empty {subset} subset")
    labels = np.asarray(labels)
    truth = labels[idx]
    if np.any(truth == UNKNOWN):
        raise ValueError(f"unknown label in {subset} subset")
    probs = np.asarray(probs)
    pred = np.argmax(probs[idx], axis=1)
    scores = probs[idx, 1]
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    fn = int(np.sum((pred == 0) & (truth == 1)))
    tn = int(np.sum((pred == 0) & (truth == 0)))
    try:
        area = auc(scores, truth)
    except ValueError:
        area = None
    return EvalResult(f1=f1_score(pred, truth), auc=area,
                      tp=tp, fp=fp, fn=fn, tn=tn, n_eval=int(idx.size))
