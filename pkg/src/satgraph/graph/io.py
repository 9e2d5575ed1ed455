"""Readers and writers for the tab-separated dataset format.

``edges.tsv``   ``u<TAB>v`` per line, 0-based ids.
``attrs.tsv``   header ``N<TAB>F`` then ``node<TAB>dim<TAB>value`` triplets.
``labels.tsv``  ``node<TAB>class_id`` per line.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import DataError
from ..numerics import SparseMatrix
from .data import CATEGORICAL, AttributedGraph


def _fields(path, line, lineno, count, kinds):
    parts = line.rstrip("\n").split("\t")
    if len(parts) != count:
        raise DataError(f"{path}:{lineno}: expected {count} tab-separated fields, got {len(parts)}")
    try:
        return [k(p) for k, p in zip(kinds, parts)]
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: {exc}") from None


def _lines(path):
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                yield lineno, line


def read_attributes(path):
    n = f = None
    rows, cols, vals = [], [], []
    for lineno, line in _lines(path):
        if n is None:
            n, f = _fields(path, line, lineno, 2, (int, int))
            if n <= 0 or f <= 0:
                raise DataError(f"{path}:{lineno}: header sizes must be positive")
            continue
        node, dim, value = _fields(path, line, lineno, 3, (int, int, float))
        if not (0 <= node < n and 0 <= dim < f):
            raise DataError(f"{path}:{lineno}: triplet ({node}, {dim}) outside ({n}, {f})")
        rows.append(node)
        cols.append(dim)
        vals.append(value)
    if n is None:
        raise DataError(f"{path}: missing N<TAB>F header")
    return n, f, rows, cols, vals


def load_graph(edges_path, attrs_path, labels_path=None, attr_kind: str = CATEGORICAL, name: str = "") -> AttributedGraph:
    n, f, rows, cols, vals = read_attributes(attrs_path)
    vals = np.asarray(vals, dtype=np.float64)
    if attr_kind == CATEGORICAL:
        bad = ~np.isin(vals, (0.0, 1.0))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DataError(f"{attrs_path}: categorical attribute ({rows[i]}, {cols[i]}) has value {vals[i]}")
    keys = np.asarray(rows, dtype=np.int64) * f + np.asarray(cols, dtype=np.int64)
    uniq, counts = np.unique(keys, return_counts=True)
    if (counts > 1).any():
        k = int(uniq[counts > 1][0])
        raise DataError(f"{attrs_path}: duplicate triplet coordinate ({k // f}, {k % f})")
    keep = vals != 0.0
    attrs = SparseMatrix(n, f, np.asarray(rows, dtype=np.int64)[keep],
                         np.asarray(cols, dtype=np.int64)[keep], vals[keep])

    edges = []
    for lineno, line in _lines(edges_path):
        u, v = _fields(edges_path, line, lineno, 2, (int, int))
        if not (0 <= u < n and 0 <= v < n):
            raise DataError(f"{edges_path}:{lineno}: endpoint out of range [0, {n})")
        edges.append((u, v))

    labels = None
    if labels_path is not None:
        labels = np.full(n, -1, dtype=np.int64)
        for lineno, line in _lines(labels_path):
            node, cls = _fields(labels_path, line, lineno, 2, (int, int))
            if not 0 <= node < n:
                raise DataError(f"{labels_path}:{lineno}: node {node} out of range")
            labels[node] = cls
        if (labels < 0).any():
            raise DataError(f"{labels_path}: {int((labels < 0).sum())} node(s) lack a label")
    return AttributedGraph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), attrs, attr_kind, labels, name=name)


def load_graph_dir(directory, attr_kind: str = CATEGORICAL) -> AttributedGraph:
    """Load ``edges.tsv``/``attrs.tsv``/``labels.tsv`` (labels optional) from a directory."""
    d = Path(directory)
    labels = d / "labels.tsv"
    return load_graph(d / "edges.tsv", d / "attrs.tsv", labels if labels.exists() else None,
                      attr_kind, name=d.name)


def save_graph(graph: AttributedGraph, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "edges.tsv", "w") as fh:
        for u, v in graph.edges.tolist():
            fh.write(f"{u}\t{v}\n")
    with open(d / "attrs.tsv", "w") as fh:
        fh.write(f"{graph.n_nodes}\t{graph.n_features}\n")
        for r, c, v in graph.attributes.entries():
            fh.write(f"{r}\t{c}\t{v!r}\n")
    if graph.labels is not None:
        with open(d / "labels.tsv", "w") as fh:
            for i, y in enumerate(graph.labels.tolist()):
                fh.write(f"{i}\t{y}\n")
    return d
