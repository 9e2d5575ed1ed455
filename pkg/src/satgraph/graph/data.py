"""Graph data model, adjacency normalization and observed-attribute views."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DataError
from ..numerics import SparseMatrix, Tensor

CATEGORICAL = "categorical"
REAL = "real"
ATTR_KINDS = (CATEGORICAL, REAL)


def canonical_edges(edges, n_nodes: Optional[int] = None) -> np.ndarray:
    """Undirected edge array of shape (E, 2) with ``u < v``, deduplicated and sorted.

    Self-loops are dropped.
    """
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if n_nodes is not None and len(e) and (e.min() < 0 or e.max() >= n_nodes):
        bad = e[(e < 0).any(axis=1) | (e >= n_nodes).any(axis=1)][0]
        raise DataError(f"edge endpoint out of range [0, {n_nodes}): {tuple(bad.tolist())}")
    e = np.sort(e, axis=1)
    e = e[e[:, 0] != e[:, 1]]
    if len(e) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(e, axis=0)


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """An undirected graph whose nodes carry (possibly multi-hot) attribute rows."""

    n_nodes: int
    edges: np.ndarray
    attributes: SparseMatrix
    attr_kind: str = CATEGORICAL
    labels: Optional[np.ndarray] = None
    class_count: Optional[int] = None
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.attr_kind not in ATTR_KINDS:
            raise DataError(f"attr_kind must be one of {ATTR_KINDS}, got {self.attr_kind!r}")
        edges = canonical_edges(self.edges, self.n_nodes)
        object.__setattr__(self, "edges", edges)
        if self.attributes.rows != self.n_nodes:
            raise DataError(f"attribute matrix has {self.attributes.rows} rows for {self.n_nodes} nodes")
        if self.attr_kind == CATEGORICAL and not np.all(np.isin(self.attributes.val, (0.0, 1.0))):
            raise DataError("categorical attributes must be 0/1")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (self.n_nodes,):
                raise DataError("labels must have one entry per node")
            count = self.class_count if self.class_count is not None else int(labels.max()) + 1
            object.__setattr__(self, "labels", labels)
            object.__setattr__(self, "class_count", int(count))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_features(self) -> int:
        return self.attributes.cols

    def adjacency(self) -> SparseMatrix:
        """Symmetric 0/1 adjacency without self-loops."""
        if "adj" not in self._cache:
            self._cache["adj"] = adjacency_from_edges(self.edges, self.n_nodes)
        return self._cache["adj"]

    def neighbors(self, node: int) -> np.ndarray:
        csr = self.adjacency().to_scipy()
        return csr.indices[csr.indptr[node]:csr.indptr[node + 1]]

    def dense_attributes(self, rows=None) -> np.ndarray:
        csr = self.attributes.to_scipy()
        if rows is not None:
            csr = csr[np.asarray(rows, dtype=np.int64)]
        return csr.toarray()

    def attribute_sets(self, rows) -> list:
        """Nonzero attribute dimensions for each requested node."""
        csr = self.attributes.to_scipy()
        return [np.sort(csr.indices[csr.indptr[i]:csr.indptr[i + 1]]) for i in rows]

    def with_edges(self, edges) -> "AttributedGraph":
        """Same nodes and attributes over a different edge set."""
        return AttributedGraph(self.n_nodes, edges, self.attributes, self.attr_kind,
                               self.labels, self.class_count, self.name)


def adjacency_from_edges(edges, n: int) -> SparseMatrix:
    e = canonical_edges(edges, n)
    row = np.concatenate([e[:, 0], e[:, 1]])
    col = np.concatenate([e[:, 1], e[:, 0]])
    return SparseMatrix(n, n, row, col, np.ones(len(row)), check=False)


def normalize_adjacency(edges, n: int) -> SparseMatrix:
    """Renormalized adjacency ``D^-1/2 (A + I) D^-1/2`` with ``D`` the degrees of ``A + I``."""
    e = canonical_edges(edges, n)
    loops = np.arange(n)
    row = np.concatenate([e[:, 0], e[:, 1], loops])
    col = np.concatenate([e[:, 1], e[:, 0], loops])
    deg = np.bincount(row, minlength=n).astype(np.float64)
    inv_sqrt = 1.0 / np.sqrt(deg)
    val = inv_sqrt[row] * inv_sqrt[col]
    return SparseMatrix(n, n, row, col, val, check=False)


def adjacency_target(edges, n: int) -> SparseMatrix:
    """``A + I`` as a 0/1 pattern: the structure reconstruction target."""
    e = canonical_edges(edges, n)
    loops = np.arange(n)
    row = np.concatenate([e[:, 0], e[:, 1], loops])
    col = np.concatenate([e[:, 1], e[:, 0], loops])
    return SparseMatrix(n, n, row, col, np.ones(len(row)), check=False)


def observed_attribute_view(graph: AttributedGraph, split) -> tuple[Tensor, np.ndarray]:
    """Dense rows of the observed nodes, ascending by node id, and the row-to-node map.

    ``index[r]`` is the node id stored in row ``r``; the same array drives the
    lookup of structure latents for those nodes.
    """
    index = np.sort(np.asarray(split.observed, dtype=np.int64))
    return Tensor(graph.dense_attributes(index)), index


def bce_pos_weight(target) -> float:
    """Ratio ``#zeros / #nonzeros`` of a binary target (dense array or SparseMatrix)."""
    if isinstance(target, SparseMatrix):
        nonzero = int(np.count_nonzero(target.val))
        total = target.rows * target.cols
    else:
        arr = np.asarray(target)
        nonzero = int(np.count_nonzero(arr))
        total = arr.size
    if nonzero == 0:
        raise DataError("positive weight undefined for an all-zero target")
    return (total - nonzero) / nonzero
