"""Reference completion methods: neighbor mean, VAE with latent neighbor mean, GNN regression.

Every completion function returns an ``|nodes| x F`` array with the same
meaning as :func:`satgraph.sat.complete_attributes` (probabilities for
categorical attributes, values for real ones).
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DivergenceError, NonFiniteError
from .eval.ranking import profile_scores
from .graph.data import CATEGORICAL, adjacency_from_edges, bce_pos_weight
from .numerics import Adam, Tape, Tensor, ops
from .sat.checkpoint import Checkpoint
from .sat.inference import complete_attributes
from .sat.losses import attribute_loss
from .sat.model import MLP, Linear, SatModel, TrainConfig
from .sat.train import deterministic_context, train


class BaselineKind(enum.Enum):
    NEIGH_AGGRE = "neighaggre"
    VAE_LATENT_AGGRE = "vae"
    GNN_REGRESSION_GCN = "gnn-gcn"
    GNN_REGRESSION_GAT = "gnn-gat"

    @property
    def backbone(self) -> Optional[str]:
        return {"gnn-gcn": "gcn", "gnn-gat": "gat"}.get(self.value)


def _observed_neighbor_mean(graph, split, rows: np.ndarray, nodes=None) -> np.ndarray:
    """Mean of ``rows`` (aligned with ``split.observed``) over each node's observed neighbors."""
    nodes = split.missing if nodes is None else np.asarray(nodes, dtype=np.int64)
    adj = adjacency_from_edges(graph.edges, graph.n_nodes).to_scipy()
    link = adj[nodes][:, split.observed]
    counts = np.asarray(link.sum(axis=1)).ravel()
    total = link @ rows
    out = np.zeros((len(nodes), rows.shape[1]))
    has = counts > 0
    out[has] = total[has] / counts[has, None]
    return out


def neigh_aggre(graph, split, nodes=None) -> np.ndarray:
    """Mean attribute row of each node's one-hop neighbors that have observed attributes.

    Nodes with no such neighbor get a zero row. No randomness, no training.
    """
    return _observed_neighbor_mean(graph, split, graph.dense_attributes(split.observed), nodes)


# -- VAE with latent aggregation ------------------------------------------


@dataclass
class VaeConfig:
    hidden: int = 256
    latent: int = 64
    lr: float = 0.005
    max_epochs: int = 500
    seed: int = 0
    deterministic: bool = True

    def __post_init__(self):
        if self.max_epochs < 1 or self.hidden < 1 or self.latent < 1:
            raise ConfigError("VAE sizes and epoch count must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown VAE option(s): {sorted(unknown)}")
        return cls(**d)


class Vae:
    """Gaussian encoder (mean and log-variance heads) with an MLP decoder."""

    def __init__(self, n_features, config: VaeConfig):
        rng = np.random.default_rng([config.seed, 1])
        h, d = config.hidden, config.latent
        self.enc = Linear(n_features, h, rng, "vae.enc")
        self.mu = Linear(h, d, rng, "vae.mu")
        self.logvar = Linear(h, d, rng, "vae.logvar")
        self.dec = MLP(d, h, n_features, rng, "vae.dec")

    def parameters(self):
        return self.enc.parameters() + self.mu.parameters() + self.logvar.parameters() + self.dec.parameters()

    def state_dict(self):
        return OrderedDict((p.name, p.data) for p in self.parameters())

    def load_state_dict(self, state):
        for p in self.parameters():
            p.data = np.asarray(state[p.name], dtype=np.float64)

    def encode(self, x: Tensor):
        h = ops.relu(self.enc(x))
        return self.mu(h), self.logvar(h)


def kl_to_standard_normal(mu: Tensor, logvar: Tensor) -> Tensor:
    """``KL(N(mu, exp(logvar)) || N(0, I))`` summed over latent dims, averaged over rows."""
    inner = ops.sub(ops.add(ops.square(mu), ops.exp(logvar)), ops.add_bias(logvar, Tensor(np.ones(mu.shape[1]))))
    return ops.scale(ops.sum(inner), 0.5 / mu.shape[0])


def vae_loss(model: Vae, x: np.ndarray, kind: str, pos_weight: float, rng: np.random.Generator):
    """Reconstruction (summed over features, averaged over rows) plus KL."""
    mu, logvar = model.encode(Tensor(x))
    eps = Tensor(rng.standard_normal(mu.shape))
    z = ops.add(mu, ops.mul(ops.exp(ops.scale(logvar, 0.5)), eps))
    recon = ops.scale(attribute_loss(model.dec(z), x, kind, pos_weight), x.shape[1])
    kl = kl_to_standard_normal(mu, logvar)
    return ops.add(recon, kl), float(recon.data), float(kl.data)


def _vae_complete(model: Vae, graph, split, nodes=None) -> np.ndarray:
    mu, _ = model.encode(Tensor(graph.dense_attributes(split.observed)))
    z = _observed_neighbor_mean(graph, split, mu.data, nodes)
    out = model.dec(Tensor(z)).data
    return expit(out) if graph.attr_kind == CATEGORICAL else out


@dataclass
class VaeFit:
    checkpoint: Checkpoint
    curves: list
    best_epoch: int
    best_score: float


def fit_vae(graph, split, config: Optional[VaeConfig] = None) -> VaeFit:
    """Train on observed rows; keep the epoch whose latent-aggregated completion scores best on validation."""
    config = config or VaeConfig()
    split.validate(graph.n_nodes)
    model = Vae(graph.n_features, config)
    x = graph.dense_attributes(split.observed)
    kind = graph.attr_kind
    w = bce_pos_weight(x) if kind == CATEGORICAL else 1.0
    opt = Adam(model.parameters(), lr=config.lr)
    rng = np.random.default_rng([config.seed, 2])
    truth = graph.attribute_sets(split.validation)
    x_val = graph.dense_attributes(split.validation)
    use_recall = kind == CATEGORICAL and graph.n_features >= 10
    curves, best = [], (None, -np.inf, 0)
    with deterministic_context(config):
        for epoch in range(1, config.max_epochs + 1):
            try:
                with Tape() as tape:
                    loss, recon, kl = vae_loss(model, x, kind, w, rng)
                grads = tape.gradient(loss, model.parameters())
                if not all(np.all(np.isfinite(g)) for g in grads):
                    raise NonFiniteError("non-finite VAE gradient")
            except NonFiniteError as exc:
                raise DivergenceError(f"VAE diverged at epoch {epoch}: {exc}", epoch=epoch) from exc
            opt.step(grads)
            pred = _vae_complete(model, graph, split, split.validation)
            if use_recall:
                score = profile_scores(pred, truth, ks=(10,)).recall[10]
            else:
                score = -float(np.mean((pred - x_val) ** 2))
            curves.append({"epoch": epoch, "recon": recon, "kl": kl, "val_metric": score})
            if score > best[1]:
                best = (OrderedDict((k, v.copy()) for k, v in model.state_dict().items()), score, epoch)
    meta = {"epoch": best[2], "score": best[1], "selection_metric": "recall@10" if use_recall else "-mse",
            "n_nodes": graph.n_nodes, "n_features": graph.n_features, "attr_kind": kind}
    return VaeFit(Checkpoint("vae_latent_aggre", config.to_dict(), best[0], meta), curves, best[2], best[1])


def vae_complete(ckpt: Checkpoint, graph, split, nodes=None) -> np.ndarray:
    if ckpt.kind != "vae_latent_aggre":
        raise ConfigError(f"expected a VAE checkpoint, got {ckpt.kind!r}")
    model = Vae(graph.n_features, VaeConfig.from_dict(ckpt.config))
    model.load_state_dict(ckpt.arrays)
    return _vae_complete(model, graph, split, nodes)


def vae_latent_aggre(graph, split, config: Optional[VaeConfig] = None) -> np.ndarray:
    """Decode, for each missing node, the mean posterior mean of its observed neighbors (zero if none)."""
    return vae_complete(fit_vae(graph, split, config).checkpoint, graph, split)


# -- GNN regression -----------------------------------------------------------


def regression_config(backbone: str = "gcn", config: Optional[TrainConfig] = None, **overrides) -> TrainConfig:
    """A training config with only the structure-to-attribute term switched on."""
    base = (config or TrainConfig()).to_dict()
    base.update(overrides)
    base.update(backbone=backbone, objective="regression", use_self=False, use_cross=True, use_adv=False)
    return TrainConfig.from_dict(base)


def fit_gnn_regression(graph, split, backbone: str = "gcn", config: Optional[TrainConfig] = None):
    cfg = regression_config(backbone, config)
    model = SatModel(graph.n_nodes, graph.n_features, cfg, graph.attr_kind)
    return train(model, graph, split, cfg)


def gnn_regression(graph, split, backbone: str = "gcn", config: Optional[TrainConfig] = None) -> np.ndarray:
    """Structure encoder plus attribute decoder fitted on observed nodes only; decodes the missing ones."""
    return complete_attributes(fit_gnn_regression(graph, split, backbone, config).checkpoint, graph, split)


def complete_with(kind: BaselineKind, graph, split, config=None) -> np.ndarray:
    kind = BaselineKind(kind)
    if kind is BaselineKind.NEIGH_AGGRE:
        return neigh_aggre(graph, split)
    if kind is BaselineKind.VAE_LATENT_AGGRE:
        return vae_latent_aggre(graph, split, config)
    return gnn_regression(graph, split, kind.backbone, config)
