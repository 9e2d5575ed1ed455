"""Synthetic attributed graphs with planted structure.

Used as ground-truth harnesses: a small two-block model whose attributes are
the block indicator, and a larger citation-like generator whose classes drive
both the edges and the bag-of-words attributes.
"""

from __future__ import annotations

import numpy as np

from ..numerics import SparseMatrix
from .data import CATEGORICAL, AttributedGraph


def _sbm_edges(blocks, p_in, p_out, rng):
    n = len(blocks)
    iu, ju = np.triu_indices(n, k=1)
    same = blocks[iu] == blocks[ju]
    prob = np.where(same, p_in, p_out)
    hit = rng.random(len(iu)) < prob
    return np.stack([iu[hit], ju[hit]], axis=1)


def two_block_sbm(n_nodes: int = 30, p_in: float = 0.5, p_out: float = 0.02, seed: int = 0) -> AttributedGraph:
    """Two equal blocks; node attributes are the one-hot block indicator (F = 2)."""
    rng = np.random.default_rng(seed)
    blocks = np.repeat([0, 1], [n_nodes // 2, n_nodes - n_nodes // 2])
    edges = _sbm_edges(blocks, p_in, p_out, rng)
    attrs = SparseMatrix(n_nodes, 2, np.arange(n_nodes), blocks, np.ones(n_nodes))
    return AttributedGraph(n_nodes, edges, attrs, CATEGORICAL, labels=blocks, class_count=2, name="sbm2")


def citation_like(n_nodes: int = 2708, n_classes: int = 7, n_features: int = 1433, n_edges: int = 5278,
                  homophily: float = 0.8, avg_hot: float = 18.0, topic_share: float = 0.6,
                  seed: int = 0) -> AttributedGraph:
    """A sparse, homophilous graph with multi-hot bag-of-words attributes.

    Each class owns a word distribution; a node draws about ``avg_hot`` distinct
    words, a ``topic_share`` fraction from its class distribution and the rest
    from a shared background. Defaults mimic the size of a small citation
    network.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_classes, size=n_nodes)
    by_class = [np.flatnonzero(labels == c) for c in range(n_classes)]

    # heavy-tailed degree propensity, like citation graphs
    weight = rng.pareto(2.5, size=n_nodes) + 1.0
    keys = set()
    edges = []
    while len(edges) < n_edges:
        u = int(rng.choice(n_nodes, p=weight / weight.sum()))
        if rng.random() < homophily:
            pool = by_class[labels[u]]
        else:
            pool = np.arange(n_nodes)
        w = weight[pool]
        v = int(pool[rng.choice(len(pool), p=w / w.sum())])
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in keys:
            continue
        keys.add(key)
        edges.append(key)

    background = rng.dirichlet(np.full(n_features, 0.3))
    topics = []
    for _ in range(n_classes):
        support = rng.choice(n_features, size=n_features // 8, replace=False)
        t = np.zeros(n_features)
        t[support] = rng.dirichlet(np.full(len(support), 0.5))
        topics.append(t)
    rows, cols = [], []
    for i in range(n_nodes):
        k = max(1, int(rng.poisson(avg_hot)))
        mix = topic_share * topics[labels[i]] + (1.0 - topic_share) * background
        k = min(k, int(np.count_nonzero(mix)))
        words = rng.choice(n_features, size=k, replace=False, p=mix)
        rows.extend([i] * k)
        cols.extend(words.tolist())
    attrs = SparseMatrix(n_nodes, n_features, rows, cols, np.ones(len(rows)))
    return AttributedGraph(n_nodes, np.array(edges), attrs, CATEGORICAL, labels=labels,
                           class_count=n_classes, name="citation-like")
