import math

import numpy as np
import pytest

from oracles import sat_recon_loss_loops
from satgraph.errors import ConfigError, DataError, DivergenceError
from satgraph.graph import AttributedGraph, LinkSplit, NodeSplit, make_node_split, two_block_sbm
from satgraph.numerics import SparseMatrix, Tape, Tensor, grad_check, ops
from satgraph.sat import (Checkpoint, SatModel, TrainConfig, TrainingData, adversarial_losses,
                          complete_attributes, model_from_checkpoint, paired_reconstruction_loss, score_links,
                          structure_input, train)


def small_config(**kw):
    base = dict(hidden=6, latent=4, edge_dim=3, dropout=0.0, max_epochs=10, selection_metric="mse")
    base.update(kw)
    return TrainConfig(**base)


def toy_graph(n=12, f=5, seed=0):
    rng = np.random.default_rng(seed)
    edges = {(int(u), int(v)) for u, v in rng.integers(0, n, (2 * n, 2)) if u < v}
    x = (rng.random((n, f)) < 0.35).astype(float)
    x[x.sum(1) == 0, 0] = 1.0
    return AttributedGraph(n, np.array(sorted(edges)), SparseMatrix.from_dense(x)), edges


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(lambda_c=0)
    with pytest.raises(ConfigError):
        TrainConfig(backbone="sage")
    with pytest.raises(ConfigError):
        TrainConfig(task="link_prediction", selection_metric="mse")
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"lambda": 1})
    c = TrainConfig(lambda_c=2.0)
    assert TrainConfig.from_dict(c.to_dict()) == c


@pytest.mark.parametrize("backbone", ["gcn", "gat"])
def test_latent_shapes(backbone):
    g, _ = toy_graph()
    m = SatModel(g.n_nodes, g.n_features, small_config(backbone=backbone))
    s = structure_input(g.edges, g.n_nodes)
    assert m.encode_structure(s).shape == (12, 4)
    assert m.encode_attributes(g.dense_attributes()).shape == (12, 4)
    assert m.decode_structure_logits(m.encode_structure(s), m.encode_structure(s)).shape == (12, 12)
    assert m.discriminate(m.encode_structure(s)).shape == (12, 1)


def test_zero_attribute_row_maps_to_bias_only_latent():
    m = SatModel(3, 5, small_config())
    z = m.encode_attributes(np.zeros((1, 5))).data
    # fresh biases are zero, so a zero row lands on the origin
    np.testing.assert_array_equal(z, np.zeros((1, 4)))


def test_single_node_graph_encodes():
    m = SatModel(1, 2, small_config())
    s = structure_input(np.zeros((0, 2), dtype=np.int64), 1)
    z = m.encode_structure(s).data
    expected = np.maximum(m.enc_a.w1.data, 0) @ m.enc_a.w2.data
    np.testing.assert_allclose(z, expected)


def test_structure_scores_match_dot_products():
    m = SatModel(5, 3, small_config())
    rng = np.random.default_rng(0)
    za, zb = Tensor(rng.standard_normal((5, 4))), Tensor(rng.standard_normal((3, 4)))
    ea, eb = m.edge_embeddings(za).data, m.edge_embeddings(zb).data
    ref = np.array([[1 / (1 + math.exp(-float(np.dot(ea[i], eb[j])))) for j in range(3)] for i in range(5)])
    np.testing.assert_allclose(m.decode_structure_scores(za, zb).data, ref, rtol=0, atol=1e-12)


def test_parameter_roles_are_disjoint():
    m = SatModel(6, 3, small_config())
    gen = {id(p) for p in m.generator_parameters()}
    disc = {id(p) for p in m.discriminator_parameters()}
    assert gen and disc and not gen & disc
    assert len(gen) + len(disc) == len(m.named_parameters())


def test_decoders_are_shared_between_streams():
    g, _ = toy_graph()
    m = SatModel(g.n_nodes, g.n_features, small_config())
    data = TrainingData.build(g, np.arange(6))
    _, fwd = paired_reconstruction_loss(m, data, 1.0, training=False)
    dec_x = m.dec_x.parameters()
    for name in ("self_x", "cross_x"):
        with Tape() as tape:
            _, fwd = paired_reconstruction_loss(m, data, 1.0, training=False)
        grads = tape.gradient(fwd.terms[name], dec_x)
        assert all(np.abs(gr).sum() > 0 for gr in grads[::2])


def test_reconstruction_loss_matches_loop_oracle():
    g, edges = toy_graph()
    cfg = small_config()
    m = SatModel(g.n_nodes, g.n_features, cfg)
    rng = np.random.default_rng(5)
    for p in m.named_parameters().values():
        p.data = rng.standard_normal(p.shape) * 0.5
    obs = np.array([0, 2, 3, 7, 8, 11])
    data = TrainingData.build(g, obs)
    lam = 3.0
    total, fwd = paired_reconstruction_loss(m, data, lam, training=False)
    ref = sat_recon_loss_loops(m.state_dict(), data.x_obs, obs.tolist(), edges, g.n_nodes, lam)
    for k, t in fwd.terms.items():
        assert float(t.data) == pytest.approx(ref[k], rel=1e-10, abs=1e-12), k
    assert float(total.data) == pytest.approx(ref["total"], rel=1e-10)


def test_disabled_terms_are_absent():
    g, _ = toy_graph()
    m = SatModel(g.n_nodes, g.n_features, small_config())
    data = TrainingData.build(g, np.arange(5))
    _, fwd = paired_reconstruction_loss(m, data, 1.0, False, use_self=False)
    assert set(fwd.terms) == {"cross_x", "cross_a"}
    _, fwd = paired_reconstruction_loss(m, data, 1.0, False, use_cross=False)
    assert set(fwd.terms) == {"self_x", "self_a"}


def test_discriminator_loss_at_zero_logit_is_four_log_two():
    m = SatModel(4, 3, small_config())
    for p in m.disc.parameters():
        p.data = np.zeros(p.shape)
    z = Tensor(np.random.default_rng(0).standard_normal((4, 4)))
    disc, gen = adversarial_losses(m, z, z, np.random.default_rng(1))
    assert float(disc.data) == pytest.approx(4 * math.log(2))
    assert float(gen.data) == pytest.approx(2 * math.log(2))
    _, sat_gen = adversarial_losses(m, z, z, np.random.default_rng(1), saturating=True)
    assert float(sat_gen.data) == pytest.approx(-2 * math.log(2))


def test_generator_loss_falls_as_discriminator_is_fooled():
    m = SatModel(4, 3, small_config())
    z = Tensor(np.zeros((4, 4)))
    vals = []
    for b in (-4.0, -1.0, 0.0, 1.0, 4.0):
        m.disc.l2.bias.data = np.array([b])
        vals.append(float(adversarial_losses(m, z, z, np.random.default_rng(0))[1].data))
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("backbone", ["gcn", "gat"])
def test_end_to_end_generator_gradient(backbone):
    g, _ = toy_graph(n=10, f=4)
    m = SatModel(g.n_nodes, g.n_features, small_config(backbone=backbone, hidden=4, latent=3, edge_dim=2))
    rng = np.random.default_rng(2)
    for p in m.named_parameters().values():
        p.data = rng.standard_normal(p.shape) * 0.4
    data = TrainingData.build(g, np.arange(0, 10, 2))
    worst = 0.0
    for name, p in m.named_parameters().items():
        def f(t, name=name):
            # route the probe through the model by swapping in the traced tensor
            old = _swap(m, name, t)
            try:
                loss, fwd = paired_reconstruction_loss(m, data, 2.0, training=False)
                disc, gen = adversarial_losses(m, fwd.z_x, fwd.z_a, np.random.default_rng(9))
                return ops.add(ops.add(loss, gen), disc)
            finally:
                _swap(m, name, old)

        worst = max(worst, grad_check(f, p.data))
    assert worst < 1e-4


def _swap(model, dotted, tensor):
    """Replace the parameter object at ``dotted`` (e.g. ``enc_x.l1.weight``); return the old one."""
    parts = dotted.split(".")
    obj = model
    for part in parts[:-1]:
        obj = getattr(obj, part)
    old = getattr(obj, parts[-1])
    setattr(obj, parts[-1], tensor)
    return old


def test_gat_attention_is_a_distribution_over_neighbors():
    g, _ = toy_graph()
    m = SatModel(g.n_nodes, g.n_features, small_config(backbone="gat"))
    s = structure_input(g.edges, g.n_nodes)
    alpha = m.enc_a.attention(m.enc_a.w1, m.enc_a.a1_src, m.enc_a.a1_dst, s.pattern).data
    np.testing.assert_allclose(np.bincount(s.pattern.row, weights=alpha, minlength=g.n_nodes), 1.0)


# -- training --------------------------------------------------------------------

def test_update_counts_and_curve_rows(sbm):
    g, split = sbm
    res = train(SatModel(g.n_nodes, g.n_features, small_config()), g, split)
    assert res.gen_updates == 20 and res.disc_updates == 10
    assert [r["epoch"] for r in res.curves] == list(range(1, 11))
    assert 1 <= res.best_epoch <= 10
    assert res.best_score == min(r["val_metric"] for r in res.curves)


def test_training_is_deterministic(sbm):
    g, split = sbm
    cfg = small_config(dropout=0.5, selection_metric=None)
    a = train(SatModel(g.n_nodes, g.n_features, cfg), g, split)
    b = train(SatModel(g.n_nodes, g.n_features, cfg), g, split)
    assert a.curves == b.curves
    assert a.checkpoint.to_bytes() == b.checkpoint.to_bytes()


def test_regression_objective_skips_adversarial_steps(sbm):
    g, split = sbm
    cfg = small_config(objective="regression", use_self=False, use_adv=False)
    m = SatModel(g.n_nodes, g.n_features, cfg)
    disc_before = [p.data.copy() for p in m.discriminator_parameters()]
    enc_x_before = [p.data.copy() for p in m.enc_x.parameters()]
    res = train(m, g, split)
    assert res.disc_updates == 0 and res.checkpoint.kind == "gnn_regression"
    assert all(r["disc_adv"] == 0 and r["self_x"] == 0 for r in res.curves)
    for a, p in zip(disc_before + enc_x_before, m.discriminator_parameters() + m.enc_x.parameters()):
        np.testing.assert_array_equal(a, p.data)


def test_divergence_reports_epoch(sbm):
    g, split = sbm
    m = SatModel(g.n_nodes, g.n_features, small_config())

    def poison(epoch, row):
        if epoch == 2:
            m.enc_x.l1.weight.data = np.full(m.enc_x.l1.weight.shape, np.nan)

    with pytest.raises(DivergenceError) as err:
        train(m, g, split, callback=poison)
    assert err.value.epoch == 3


def test_training_input_checks(sbm):
    g, _ = sbm
    empty = NodeSplit([], np.arange(5), np.arange(5, 30), seed=0)
    with pytest.raises(DataError):
        train(SatModel(g.n_nodes, g.n_features, small_config()), g, empty)
    with pytest.raises(ConfigError):
        cfg = small_config(task="link_prediction", selection_metric=None)
        train(SatModel(g.n_nodes, g.n_features, cfg), g, make_node_split(g, seed=0))


@pytest.fixture(scope="module")
def sbm_fit():
    g = two_block_sbm(seed=0)
    split = make_node_split(g, seed=0)
    cfg = TrainConfig(hidden=32, latent=16, edge_dim=16, max_epochs=200, lambda_c=1.0)
    return g, split, train(SatModel(g.n_nodes, g.n_features, cfg), g, split)


def test_sbm_block_recovery(sbm_fit):
    g, split, res = sbm_fit
    probs = complete_attributes(res.checkpoint, g, split)
    assert np.all((probs > 0) & (probs < 1))
    truth = g.labels[split.missing]
    assert np.mean(probs.argmax(1) == truth) > 0.9
    right = probs[np.arange(len(truth)), truth]
    wrong = probs[np.arange(len(truth)), 1 - truth]
    assert np.mean(right > wrong) > 0.9


def test_checkpoint_roundtrip(sbm_fit, tmp_path):
    g, split, res = sbm_fit
    path = res.checkpoint.save(tmp_path / "ck.bin")
    back = Checkpoint.load(path)
    assert back == res.checkpoint
    np.testing.assert_array_equal(complete_attributes(back, g, split), complete_attributes(res.checkpoint, g, split))
    m = model_from_checkpoint(back)
    for k, v in res.checkpoint.arrays.items():
        np.testing.assert_array_equal(m.state_dict()[k], v)


def test_checkpoint_rejects_corruption(sbm_fit):
    buf = sbm_fit[2].checkpoint.to_bytes()
    for bad in (b"XXXXXXXX" + buf[8:], buf[:-3], buf + b"\0"):
        with pytest.raises(DataError):
            Checkpoint.from_bytes(bad)


def test_completion_needs_matching_graph(sbm_fit):
    _, _, res = sbm_fit
    with pytest.raises(DataError):
        complete_attributes(res.checkpoint, two_block_sbm(n_nodes=20, seed=0), nodes=[0])


def test_link_scores_symmetric_and_heldout_edge_ranked_high():
    # two disjoint 4-cliques; (0, 1) is held out from message passing
    cliques = [(a + o, b + o) for o in (0, 4) for a in range(4) for b in range(a + 1, 4)]
    labels = np.repeat([0, 1], 4)
    g = AttributedGraph(8, np.array(cliques), SparseMatrix.from_dense(np.eye(2)[labels]), labels=labels)
    train_edges = np.array([e for e in cliques if e != (0, 1)])
    ls = LinkSplit(train_edges, [(0, 1)], [(0, 1)], [(0, 5)], [(0, 5)], seed=0)
    split = NodeSplit([1, 2, 5, 6], [3, 7], [0, 4], seed=0)
    cfg = TrainConfig(hidden=16, latent=8, edge_dim=8, max_epochs=100, task="link_prediction", dropout=0.0)
    res = train(SatModel(8, 2, cfg), g, split, link_split=ls)
    s = score_links(res.checkpoint, g, [(0, 1), (1, 0), (0, 5), (5, 0)], edges=train_edges)
    assert s[0] == pytest.approx(s[1], abs=1e-15) and s[2] == pytest.approx(s[3], abs=1e-15)
    assert s[0] > s[2]
    with pytest.raises(ConfigError):
        score_links(res.checkpoint, g, [(0, 1)])
    with pytest.raises(DataError):
        score_links(res.checkpoint, g, [(0, 9)], edges=train_edges)
