"""Latent-code export for external visualization."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from ..sat.inference import attribute_latents, structure_latents


def embeddings_csv(node_ids, values) -> str:
    """CSV text with a ``node`` column and ``z0..z{d-1}``; floats use ``repr`` so they parse back exactly."""
    node_ids = np.asarray(node_ids, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(node_ids, kind="stable")
    buf = io.StringIO()
    buf.write(",".join(["node"] + [f"z{j}" for j in range(values.shape[1])]) + "\n")
    for i in order:
        buf.write(",".join([str(int(node_ids[i]))] + [repr(float(v)) for v in values[i]]) + "\n")
    return buf.getvalue()


def read_embeddings_csv(path):
    lines = Path(path).read_text().splitlines()
    rows = [ln.split(",") for ln in lines[1:] if ln]
    ids = np.array([int(r[0]) for r in rows], dtype=np.int64)
    vals = np.array([[float(v) for v in r[1:]] for r in rows], dtype=np.float64)
    return ids, vals


def export_embeddings(ckpt, graph, nodes=None, path=None, source: str = "structure", edges=None) -> str:
    """Write ``Z_A`` (or ``Z_X`` with ``source="attribute"``) rows of ``nodes``, ordered by node id."""
    nodes = np.arange(graph.n_nodes) if nodes is None else np.unique(np.asarray(nodes, dtype=np.int64))
    if source == "structure":
        values = structure_latents(ckpt, graph, edges)[nodes]
    elif source == "attribute":
        values = attribute_latents(ckpt, graph, nodes)
    else:
        raise ValueError("source must be 'structure' or 'attribute'")
    text = embeddings_csv(nodes, values)
    if path is not None:
        Path(path).write_text(text)
    return text
