import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import dense, norm_adj_loops
from satgraph.errors import ConfigError, DataError
from satgraph.graph import (AttributedGraph, LinkSplit, NodeSplit, adjacency_target, bce_pos_weight, canonical_edges,
                            citation_like, load_graph, load_graph_dir, load_split, make_link_split,
                            make_node_split, normalize_adjacency, observed_attribute_view, sample_negatives,
                            save_graph, save_split, two_block_sbm)
from satgraph.numerics import SparseMatrix


def _graph(n=6, edges=((0, 1), (1, 2), (3, 4)), attrs=None):
    attrs = np.eye(n, 4) if attrs is None else attrs
    return AttributedGraph(n, np.array(edges), SparseMatrix.from_dense(attrs))


edge_lists = st.integers(2, 9).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=20)))


@given(edge_lists)
def test_normalized_adjacency_matches_loop_oracle(case):
    n, edges = case
    canon = {(min(u, v), max(u, v)) for u, v in edges if u != v}
    got = normalize_adjacency(np.array(edges, dtype=np.int64).reshape(-1, 2), n).to_dense()
    np.testing.assert_allclose(got, dense(norm_adj_loops(canon, n)), rtol=1e-14)
    np.testing.assert_allclose(got, got.T)


def test_isolated_node_gets_unit_self_loop():
    a = normalize_adjacency(np.zeros((0, 2), dtype=np.int64), 1).to_dense()
    np.testing.assert_array_equal(a, [[1.0]])


def test_canonical_edges():
    e = canonical_edges([(2, 1), (1, 2), (0, 0), (3, 0)])
    np.testing.assert_array_equal(e, [[0, 3], [1, 2]])
    with pytest.raises(DataError):
        canonical_edges([(0, 5)], n_nodes=3)


def test_adjacency_target_and_pos_weight():
    t = adjacency_target(np.array([[0, 1]]), 3).to_dense()
    np.testing.assert_array_equal(t, [[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    # 5 nonzero of 9 entries
    assert bce_pos_weight(adjacency_target(np.array([[0, 1]]), 3)) == pytest.approx(4 / 5)
    assert bce_pos_weight(np.array([[1.0, 0, 0, 0]])) == pytest.approx(3.0)
    with pytest.raises(DataError):
        bce_pos_weight(np.zeros((2, 2)))


def test_graph_validation():
    with pytest.raises(DataError):
        AttributedGraph(3, np.array([[0, 1]]), SparseMatrix.from_dense(np.eye(2)))
    with pytest.raises(DataError):
        AttributedGraph(2, np.array([[0, 1]]), SparseMatrix.from_dense(2 * np.eye(2)))
    g = _graph()
    assert g.n_edges == 3 and g.n_features == 4
    np.testing.assert_array_equal(g.neighbors(1), [0, 2])
    assert [s.tolist() for s in g.attribute_sets([0, 5])] == [[0], []]


def test_observed_view_is_sorted_and_dense():
    g = _graph()
    split = NodeSplit([4, 1], [0], [2, 3, 5], seed=0)
    x, idx = observed_attribute_view(g, split)
    np.testing.assert_array_equal(idx, [1, 4])
    np.testing.assert_array_equal(x.data, np.eye(6, 4)[[1, 4]])


# -- io -----------------------------------------------------------------------

def test_graph_io_roundtrip(tmp_path):
    g = citation_like(n_nodes=40, n_classes=3, n_features=25, n_edges=70, avg_hot=4, seed=3)
    save_graph(g, tmp_path / "g")
    h = load_graph_dir(tmp_path / "g")
    assert h.n_nodes == g.n_nodes and h.attributes == g.attributes
    np.testing.assert_array_equal(h.edges, g.edges)
    np.testing.assert_array_equal(h.labels, g.labels)


def test_real_valued_roundtrip_is_exact(tmp_path):
    vals = np.array([[0.1, 0.0], [1 / 3, -2.5e-17]])
    g = AttributedGraph(2, np.array([[0, 1]]), SparseMatrix.from_dense(vals), attr_kind="real")
    save_graph(g, tmp_path)
    h = load_graph_dir(tmp_path, attr_kind="real")
    np.testing.assert_array_equal(h.dense_attributes(), vals)


@pytest.mark.parametrize("attrs,edges,match", [
    ("2\t2\n0\t0\t1\n0\t0\t1\n", "0\t1\n", "duplicate"),
    ("2\t2\n0\t5\t1\n", "0\t1\n", "outside"),
    ("2\t2\n0\t1\t0.5\n", "0\t1\n", "categorical"),
    ("2\t2\n0\t1\n", "0\t1\n", "3 tab-separated"),
    ("2\t2\n0\t1\t1\n", "0\t7\n", "out of range"),
    ("2\t2\n0\t1\tx\n", "0\t1\n", "attrs.tsv:2"),
])
def test_loader_rejects_malformed_files(tmp_path, attrs, edges, match):
    (tmp_path / "attrs.tsv").write_text(attrs)
    (tmp_path / "edges.tsv").write_text(edges)
    with pytest.raises(DataError, match=match):
        load_graph(tmp_path / "edges.tsv", tmp_path / "attrs.tsv")


def test_loader_reports_unlabelled_nodes(tmp_path):
    (tmp_path / "attrs.tsv").write_text("2\t2\n0\t1\t1\n")
    (tmp_path / "edges.tsv").write_text("0\t1\n")
    (tmp_path / "labels.tsv").write_text("0\t1\n")
    with pytest.raises(DataError, match="lack a label"):
        load_graph_dir(tmp_path)


# -- splits ---------------------------------------------------------------------

def test_node_split_sizes_for_cora_count():
    s = make_node_split(2708, seed=0)
    assert s.sizes() == (1083, 271, 1354)
    assert make_node_split(10, seed=0).sizes() == (4, 1, 5)


@given(st.integers(3, 400), st.integers(0, 2 ** 31))
def test_node_split_is_a_partition(n, seed):
    s = make_node_split(n, seed=seed)
    s.validate(n)
    assert s == make_node_split(n, seed=seed)


def test_different_seeds_give_different_partitions():
    splits = [make_node_split(2708, seed=s) for s in range(5)]
    assert all(not np.array_equal(a.missing, b.missing) for i, a in enumerate(splits) for b in splits[i + 1:])


def test_node_split_ratios_validated():
    with pytest.raises(ConfigError):
        make_node_split(10, ratios=(0.5, 0.5, 0.2))
    with pytest.raises(ConfigError):
        make_node_split(10, ratios=(0.5, 0.5))


def test_split_files_are_byte_identical_per_seed(tmp_path):
    g = two_block_sbm(seed=1)
    save_split(tmp_path / "a.json", make_node_split(g, seed=7))
    save_split(tmp_path / "b.json", make_node_split(g, seed=7))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert load_split(tmp_path / "a.json") == make_node_split(g, seed=7)


def test_link_split_partition_and_negatives():
    g = citation_like(n_nodes=200, n_classes=3, n_features=30, n_edges=500, avg_hot=4, seed=0)
    s = make_link_split(g, seed=3)
    assert (len(s.train_pos), len(s.val_pos), len(s.test_pos)) == (300, 100, 100)
    allpos = np.vstack([s.train_pos, s.val_pos, s.test_pos])
    assert len({tuple(e) for e in allpos.tolist()}) == 500
    edge_set = {tuple(e) for e in g.edges.tolist()}
    negs = np.vstack([s.val_neg, s.test_neg])
    assert len(s.val_neg) == 100 and len(s.test_neg) == 100
    assert all(tuple(e) not in edge_set and e[0] < e[1] for e in negs.tolist())
    assert len({tuple(e) for e in negs.tolist()}) == len(negs)
    assert s == make_link_split(g, seed=3)


def test_cora_sized_link_split_counts():
    g = citation_like(seed=0)
    s = make_link_split(g, seed=0)
    assert len(s.train_pos) == 3166 and len(s.val_pos) == 1055 and len(s.test_pos) == 1057


def test_negative_sampling_pool_too_small():
    with pytest.raises(DataError):
        sample_negatives(3, np.array([[0, 1], [1, 2]]), 2, np.random.default_rng(0))


def test_bundle_roundtrip(tmp_path):
    g = two_block_sbm(seed=0)
    bundle = {"node": make_node_split(g, seed=1), "link": make_link_split(g, seed=1)}
    save_split(tmp_path / "s.json", bundle)
    back = load_split(tmp_path / "s.json")
    assert back["node"] == bundle["node"] and back["link"] == bundle["link"]
    assert json.loads((tmp_path / "s.json").read_text())["kind"] == "bundle"
    assert isinstance(back["link"], LinkSplit)


def test_malformed_split_file(tmp_path):
    (tmp_path / "s.json").write_text('{"kind": "node"}')
    with pytest.raises(DataError):
        load_split(tmp_path / "s.json")


# -- synthetic generators ----------------------------------------------------------

def test_sbm_shape_and_indicator():
    g = two_block_sbm(seed=0)
    x = g.dense_attributes()
    assert g.n_nodes == 30 and x.shape == (30, 2)
    np.testing.assert_array_equal(x.argmax(1), g.labels)
    same = g.labels[g.edges[:, 0]] == g.labels[g.edges[:, 1]]
    assert same.mean() > 0.8


def test_citation_like_matches_requested_sizes():
    g = citation_like(seed=0)
    assert (g.n_nodes, g.n_edges, g.n_features) == (2708, 5278, 1433)
    hot = np.bincount(g.attributes.row, minlength=g.n_nodes)
    assert 15 < hot.mean() < 21 and hot.min() >= 1
