"""Read-only use of a trained checkpoint: completion, link scores, latent codes."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import ConfigError, DataError
from ..graph.data import CATEGORICAL
from ..numerics import Tensor
from .checkpoint import Checkpoint
from .model import SatModel, TrainConfig, structure_input

MODEL_KINDS = ("sat", "gnn_regression")


def model_from_checkpoint(ckpt: Checkpoint) -> SatModel:
    if ckpt.kind not in MODEL_KINDS:
        raise ConfigError(f"checkpoint of kind {ckpt.kind!r} does not hold a structure-encoder model")
    config = TrainConfig.from_dict(ckpt.config)
    meta = ckpt.meta
    model = SatModel(int(meta["n_nodes"]), int(meta["n_features"]), config, meta.get("attr_kind", CATEGORICAL))
    model.load_state_dict(ckpt.arrays)
    return model


def _message_edges(ckpt, graph, edges):
    if edges is not None:
        return edges
    if ckpt.config.get("task") == "link_prediction":
        raise ConfigError("link-prediction checkpoints need their training links for message passing")
    return graph.edges


def _check_graph(ckpt, graph):
    if graph.n_nodes != int(ckpt.meta["n_nodes"]) or graph.n_features != int(ckpt.meta["n_features"]):
        raise DataError(f"graph ({graph.n_nodes} nodes, {graph.n_features} features) does not match the "
                        f"checkpoint ({ckpt.meta['n_nodes']}, {ckpt.meta['n_features']})")


def structure_latents(ckpt: Checkpoint, graph, edges=None, model=None) -> np.ndarray:
    """``Z_A`` for every node (eval mode)."""
    _check_graph(ckpt, graph)
    model = model or model_from_checkpoint(ckpt)
    s = structure_input(_message_edges(ckpt, graph, edges), graph.n_nodes)
    return model.encode_structure(s).data


def attribute_latents(ckpt: Checkpoint, graph, nodes) -> np.ndarray:
    """``Z_X`` of the given nodes from their true attribute rows."""
    _check_graph(ckpt, graph)
    model = model_from_checkpoint(ckpt)
    return model.encode_attributes(graph.dense_attributes(np.asarray(nodes, dtype=np.int64))).data


def complete_attributes(ckpt: Checkpoint, graph, split=None, nodes=None, edges=None) -> np.ndarray:
    """Restored attribute rows for ``nodes`` (default: the split's missing set).

    Categorical attributes come back as per-dimension probabilities, real
    ones as raw decoder outputs. Rows follow the order of ``nodes``.
    """
    if nodes is None:
        if split is None:
            raise ConfigError("give either a split or an explicit node list")
        nodes = split.missing
    nodes = np.asarray(nodes, dtype=np.int64)
    model = model_from_checkpoint(ckpt)
    z_a = structure_latents(ckpt, graph, edges, model)
    out = model.decode_attributes(Tensor(z_a[nodes])).data
    return expit(out) if model.attr_kind == CATEGORICAL else out


def score_links(ckpt: Checkpoint, graph, pairs, edges=None) -> np.ndarray:
    """Link probabilities ``sigmoid(e_u . e_v)`` with ``e`` the edge embeddings of ``Z_A``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) and (pairs.min() < 0 or pairs.max() >= graph.n_nodes):
        raise DataError(f"node id out of range [0, {graph.n_nodes})")
    model = model_from_checkpoint(ckpt)
    z_a = structure_latents(ckpt, graph, edges, model)
    emb = model.edge_embeddings(Tensor(z_a)).data
    return expit(np.einsum("ij,ij->i", emb[pairs[:, 0]], emb[pairs[:, 1]]))
