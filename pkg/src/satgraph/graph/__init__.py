"""Attributed graphs, dataset files, node/link splits and adjacency normalization."""

from .data import (ATTR_KINDS, CATEGORICAL, REAL, AttributedGraph, adjacency_from_edges, adjacency_target,
                   bce_pos_weight, canonical_edges, normalize_adjacency, observed_attribute_view)
from .io import load_graph, load_graph_dir, save_graph
from .splits import (LINK_RATIOS, NODE_RATIOS, LinkSplit, NodeSplit, load_split, make_link_split,
                     make_node_split, sample_negatives, save_split, split_from_dict, split_to_dict)
from .synthetic import citation_like, two_block_sbm

__all__ = [
    "ATTR_KINDS", "CATEGORICAL", "LINK_RATIOS", "NODE_RATIOS", "REAL", "AttributedGraph", "LinkSplit",
    "NodeSplit", "adjacency_from_edges", "adjacency_target", "bce_pos_weight", "canonical_edges",
    "citation_like", "load_graph", "load_graph_dir", "load_split", "make_link_split", "make_node_split",
    "normalize_adjacency", "observed_attribute_view", "sample_negatives", "save_graph", "save_split",
    "split_from_dict", "split_to_dict", "two_block_sbm",
]
