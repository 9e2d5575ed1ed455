"""Attribute-level profiling metrics: Recall@k and NDCG@k with binary relevance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

DEFAULT_KS = (10, 20, 50)
SPARSE_KS = (3, 5, 10)


def ranking(scores) -> np.ndarray:
    """Dimension indices by descending score; ties go to the lower index."""
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


def _check(truth, k, n_dims):
    truth = np.unique(np.asarray(truth, dtype=np.int64))
    if len(truth) == 0:
        raise DataError("empty ground-truth attribute set")
    if not 1 <= k <= n_dims:
        raise ValueError(f"k must lie in [1, {n_dims}], got {k}")
    return truth


def recall_at_k(scores, truth, k: int) -> float:
    """``|top-k(scores) ∩ truth| / |truth|``."""
    scores = np.asarray(scores)
    truth = _check(truth, k, len(scores))
    top = ranking(scores)[:k]
    return float(np.isin(top, truth).sum()) / len(truth)


def _discounts(n):
    return 1.0 / np.log2(np.arange(2, n + 2))


def ndcg_at_k(scores, truth, k: int) -> float:
    """DCG over the top-k hits divided by the ideal DCG of ``min(k, |truth|)`` hits."""
    scores = np.asarray(scores)
    truth = _check(truth, k, len(scores))
    hits = np.isin(ranking(scores)[:k], truth)
    disc = _discounts(k)
    return float(disc[hits].sum() / disc[:min(k, len(truth))].sum())


@dataclass
class ProfilingResult:
    recall: dict = field(default_factory=dict)
    ndcg: dict = field(default_factory=dict)
    n_nodes: int = 0
    n_skipped: int = 0

    def to_dict(self):
        out = {f"recall@{k}": v for k, v in self.recall.items()}
        out.update({f"ndcg@{k}": v for k, v in self.ndcg.items()})
        out["profiled_nodes"] = self.n_nodes
        out["skipped_empty_truth"] = self.n_skipped
        return out


def profile_scores(scores: np.ndarray, truth_sets, ks=DEFAULT_KS, per_node: bool = False):
    """Mean Recall@k and NDCG@k over rows of ``scores`` (one row per node).

    Rows whose truth set is empty are skipped and counted. With ``per_node``
    the per-node arrays are returned as well.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(truth_sets) != len(scores):
        raise DataError("one truth set per score row required")
    ks = tuple(int(k) for k in ks)
    kmax = max(ks)
    if kmax > scores.shape[1]:
        raise ValueError(f"k={kmax} exceeds the attribute dimension {scores.shape[1]}")
    keep = [i for i, t in enumerate(truth_sets) if len(t) > 0]
    res = ProfilingResult(n_nodes=len(keep), n_skipped=len(truth_sets) - len(keep))
    if not keep:
        return (res, {}) if per_node else res
    order = np.argsort(-scores[keep], axis=1, kind="stable")[:, :kmax]
    hits = np.zeros(order.shape, dtype=bool)
    sizes = np.zeros(len(keep))
    for r, i in enumerate(keep):
        t = np.asarray(truth_sets[i], dtype=np.int64)
        hits[r] = np.isin(order[r], t)
        sizes[r] = len(np.unique(t))
    disc = _discounts(kmax)
    cum_hits = np.cumsum(hits, axis=1)
    cum_dcg = np.cumsum(hits * disc, axis=1)
    cum_ideal = np.cumsum(disc)
    rows = {}
    for k in ks:
        rec = cum_hits[:, k - 1] / sizes
        ideal = cum_ideal[np.minimum(k, sizes).astype(int) - 1]
        nd = cum_dcg[:, k - 1] / ideal
        res.recall[k] = float(rec.mean())
        res.ndcg[k] = float(nd.mean())
        rows[k] = (rec, nd)
    return (res, rows) if per_node else res
