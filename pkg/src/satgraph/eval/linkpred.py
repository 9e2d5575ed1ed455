"""Link-prediction metrics on held-out positives against sampled non-links."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass
class LinkPredResult:
    auc: float
    ap: float

    def to_dict(self):
        return {"auc": self.auc, "ap": self.ap}


def auc_score(pos, neg) -> float:
    """Mann-Whitney statistic; tied pairs count one half."""
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("AUC needs at least one positive and one negative score")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[:len(pos)].sum() - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def average_precision(pos, neg) -> float:
    """Step-interpolated area under precision-recall, thresholds at distinct scores."""
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("AP needs at least one positive and one negative score")
    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    order = np.argsort(-scores, kind="stable")
    scores, labels = scores[order], labels[order]
    # last index of each block of tied scores
    ends = np.flatnonzero(np.diff(scores) != 0)
    ends = np.append(ends, len(scores) - 1)
    tp = np.cumsum(labels)[ends]
    precision = tp / (ends + 1)
    recall_gain = np.diff(np.concatenate([[0.0], tp])) / len(pos)
    return float((recall_gain * precision).sum())


def auc_ap(pos, neg) -> tuple[float, float]:
    return auc_score(pos, neg), average_precision(pos, neg)
