"""SAT architecture: dual encoders, shared decoders and a shared discriminator."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from ..errors import ConfigError
from ..graph.data import adjacency_target, normalize_adjacency
from ..numerics import SparseMatrix, Tensor, glorot_init, ops, zeros

BACKBONES = ("gcn", "gat")
TASKS = ("completion", "link_prediction")
SELECTION_METRICS = ("recall@10", "mse", "auc")
OBJECTIVES = ("sat", "regression")


@dataclass
class TrainConfig:
    lambda_c: float = 10.0
    lr: float = 0.005
    dropout: float = 0.5
    max_epochs: int = 1000
    gen_steps: int = 2
    disc_steps: int = 1
    seed: int = 0
    backbone: str = "gcn"
    task: str = "completion"
    selection_metric: Optional[str] = None
    hidden: int = 256
    latent: int = 64
    edge_dim: int = 64
    use_self: bool = True
    use_cross: bool = True
    use_adv: bool = True
    saturating_gen: bool = False
    # "all": cross structure stream scores observed nodes against every node
    cross_struct_dest: str = "all"
    objective: str = "sat"
    gat_slope: float = 0.2
    mmd_every: int = 1
    mmd_sample: int = 500
    deterministic: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.lambda_c > 0:
            raise ConfigError(f"lambda_c must be positive, got {self.lambda_c}")
        if self.gen_steps < 1 or self.disc_steps < 1:
            raise ConfigError("gen_steps and disc_steps must be at least 1")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be at least 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.backbone not in BACKBONES:
            raise ConfigError(f"backbone must be one of {BACKBONES}")
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}")
        if self.selection_metric is not None and self.selection_metric not in SELECTION_METRICS:
            raise ConfigError(f"selection_metric must be one of {SELECTION_METRICS}")
        if self.task == "link_prediction" and self.selection_metric not in (None, "auc"):
            raise ConfigError("link prediction selects on validation AUC")
        if self.cross_struct_dest not in ("all", "observed"):
            raise ConfigError("cross_struct_dest must be 'all' or 'observed'")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown training option(s): {sorted(unknown)}")
        return cls(**d)


class StructureInput(NamedTuple):
    """What the structure encoder consumes: normalized adjacency and the A+I pattern."""

    norm_adj: SparseMatrix
    pattern: SparseMatrix
    edges: np.ndarray


def structure_input(edges, n_nodes: int) -> StructureInput:
    return StructureInput(normalize_adjacency(edges, n_nodes), adjacency_target(edges, n_nodes),
                          np.asarray(edges, dtype=np.int64).reshape(-1, 2))


class Linear:
    def __init__(self, n_in, n_out, rng, name):
        self.weight = glorot_init((n_in, n_out), rng, name=f"{name}.weight")
        self.bias = zeros((n_out,), name=f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add_bias(ops.matmul(x, self.weight), self.bias)

    def parameters(self):
        return [self.weight, self.bias]


class MLP:
    """Two-layer perceptron, ReLU hidden layer, linear output."""

    def __init__(self, n_in, n_hidden, n_out, rng, name):
        self.l1 = Linear(n_in, n_hidden, rng, f"{name}.l1")
        self.l2 = Linear(n_hidden, n_out, rng, f"{name}.l2")

    def __call__(self, x, dropout=0.0, training=False, rng=None):
        h = ops.relu(self.l1(x))
        if training and dropout > 0:
            h = ops.dropout(h, dropout, True, rng)
        return self.l2(h)

    def parameters(self):
        return self.l1.parameters() + self.l2.parameters()


class GCNEncoder:
    """``Z = Â · ReLU(Â · W1) · W2`` on identity node features."""

    def __init__(self, n_nodes, n_hidden, n_out, rng, name="enc_a"):
        self.w1 = glorot_init((n_nodes, n_hidden), rng, name=f"{name}.w1")
        self.w2 = glorot_init((n_hidden, n_out), rng, name=f"{name}.w2")

    def __call__(self, s: StructureInput, dropout=0.0, training=False, rng=None):
        h = ops.relu(ops.spmm(s.norm_adj, self.w1))
        if training and dropout > 0:
            h = ops.dropout(h, dropout, True, rng)
        return ops.spmm(s.norm_adj, ops.matmul(h, self.w2))

    def parameters(self):
        return [self.w1, self.w2]


class GATEncoder:
    """Two single-head attention layers over neighbors plus self."""

    def __init__(self, n_nodes, n_hidden, n_out, rng, name="enc_a", slope=0.2):
        self.slope = slope
        self.w1 = glorot_init((n_nodes, n_hidden), rng, name=f"{name}.w1")
        self.a1_src = glorot_init((n_hidden, 1), rng, name=f"{name}.a1_src")
        self.a1_dst = glorot_init((n_hidden, 1), rng, name=f"{name}.a1_dst")
        self.w2 = glorot_init((n_hidden, n_out), rng, name=f"{name}.w2")
        self.a2_src = glorot_init((n_out, 1), rng, name=f"{name}.a2_src")
        self.a2_dst = glorot_init((n_out, 1), rng, name=f"{name}.a2_dst")

    def attention(self, wh, a_src, a_dst, pattern):
        logits = ops.edge_scores(ops.matmul(wh, a_src), ops.matmul(wh, a_dst), pattern)
        return ops.edge_softmax(ops.leaky_relu(logits, self.slope), pattern)

    def __call__(self, s: StructureInput, dropout=0.0, training=False, rng=None):
        alpha1 = self.attention(self.w1, self.a1_src, self.a1_dst, s.pattern)
        h = ops.relu(ops.edge_spmm(alpha1, s.pattern, self.w1))
        if training and dropout > 0:
            h = ops.dropout(h, dropout, True, rng)
        wh = ops.matmul(h, self.w2)
        alpha2 = self.attention(wh, self.a2_src, self.a2_dst, s.pattern)
        return ops.edge_spmm(alpha2, s.pattern, wh)

    def parameters(self):
        return [self.w1, self.a1_src, self.a1_dst, self.w2, self.a2_src, self.a2_dst]


class SatModel:
    """Parameters and forward paths of the structure-attribute transformer.

    ``enc_x``/``enc_a`` map attributes/structure to latents; ``dec_x`` and
    ``dec_a`` are each shared by both latent sources; ``disc`` scores latents
    against prior samples.
    """

    def __init__(self, n_nodes: int, n_features: int, config: TrainConfig, attr_kind: str = "categorical"):
        self.n_nodes, self.n_features = n_nodes, n_features
        self.config = config
        self.attr_kind = attr_kind
        rng = np.random.default_rng([config.seed, 1])
        h, d, de = config.hidden, config.latent, config.edge_dim
        self.enc_x = MLP(n_features, h, d, rng, "enc_x")
        if config.backbone == "gcn":
            self.enc_a = GCNEncoder(n_nodes, h, d, rng)
        else:
            self.enc_a = GATEncoder(n_nodes, h, d, rng, slope=config.gat_slope)
        self.dec_x = MLP(d, h, n_features, rng, "dec_x")
        self.dec_a = MLP(d, h, de, rng, "dec_a")
        self.disc = MLP(d, h, 1, rng, "disc")

    # -- parameter bookkeeping ---------------------------------------------
    def named_parameters(self) -> "OrderedDict[str, Tensor]":
        out = OrderedDict()
        for module in (self.enc_x, self.enc_a, self.dec_x, self.dec_a, self.disc):
            for p in module.parameters():
                out[p.name] = p
        return out

    def generator_parameters(self) -> list[Tensor]:
        return (self.enc_x.parameters() + self.enc_a.parameters()
                + self.dec_x.parameters() + self.dec_a.parameters())

    def discriminator_parameters(self) -> list[Tensor]:
        return self.disc.parameters()

    def state_dict(self) -> dict:
        return {k: p.data for k, p in self.named_parameters().items()}

    def load_state_dict(self, state: dict) -> None:
        params = self.named_parameters()
        missing = set(params) - set(state)
        if missing:
            raise ConfigError(f"checkpoint lacks parameters {sorted(missing)}")
        for k, p in params.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != p.shape:
                raise ConfigError(f"parameter {k}: checkpoint shape {arr.shape} vs model {p.shape}")
            p.data = arr

    # -- forward paths ---------------------------------------------------------
    def encode_attributes(self, x, training=False, rng=None) -> Tensor:
        x = x if isinstance(x, Tensor) else Tensor(x)
        return self.enc_x(x, self.config.dropout, training, rng)

    def encode_structure(self, s: StructureInput, training=False, rng=None) -> Tensor:
        return self.enc_a(s, self.config.dropout, training, rng)

    def decode_attributes(self, z: Tensor) -> Tensor:
        """Attribute logits (categorical) or values (real-valued)."""
        return self.dec_x(z)

    def edge_embeddings(self, z: Tensor) -> Tensor:
        return self.dec_a(z)

    def decode_structure_logits(self, z_src: Tensor, z_dst: Tensor) -> Tensor:
        e_src = self.dec_a(z_src)
        e_dst = e_src if z_dst is z_src else self.dec_a(z_dst)
        return ops.matmul(e_src, ops.transpose(e_dst))

    def decode_structure_scores(self, z_src: Tensor, z_dst: Tensor) -> Tensor:
        return ops.sigmoid(self.decode_structure_logits(z_src, z_dst))

    def discriminate(self, z: Tensor) -> Tensor:
        return self.disc(z)
