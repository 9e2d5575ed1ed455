"""Paired reconstruction and adversarial matching losses."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..errors import NonFiniteError
from ..graph.data import CATEGORICAL, adjacency_target, bce_pos_weight
from ..numerics import Tensor, ops
from .model import SatModel, StructureInput, structure_input


@dataclass
class LossBreakdown:
    self_x: float = 0.0
    self_a: float = 0.0
    cross_x: float = 0.0
    cross_a: float = 0.0
    gen_adv: float = 0.0
    disc_adv: float = 0.0

    def generator_total(self, lambda_c: float) -> float:
        return self.self_x + self.self_a + lambda_c * (self.cross_x + self.cross_a) + self.gen_adv

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainingData:
    """Everything the losses need, precomputed once per run."""

    x_obs: np.ndarray
    obs_index: np.ndarray
    structure: StructureInput
    adj_target: np.ndarray
    adj_pos_weight: float
    attr_pos_weight: float
    attr_kind: str

    @classmethod
    def build(cls, graph, observed, edges=None) -> "TrainingData":
        """``edges`` defaults to the graph's edges; pass training links for link prediction."""
        edges = graph.edges if edges is None else edges
        obs_index = np.sort(np.asarray(observed, dtype=np.int64))
        x_obs = graph.dense_attributes(obs_index)
        target = adjacency_target(edges, graph.n_nodes)
        adj_dense = target.to_dense()
        attr_w = bce_pos_weight(x_obs) if graph.attr_kind == CATEGORICAL else 1.0
        return cls(x_obs, obs_index, structure_input(edges, graph.n_nodes), adj_dense,
                   bce_pos_weight(target), attr_w, graph.attr_kind)


def attribute_loss(logits: Tensor, target: np.ndarray, kind: str, pos_weight: float) -> Tensor:
    """Weighted BCE for categorical attributes, mean-square error for real-valued ones."""
    if kind == CATEGORICAL:
        return ops.bce_with_logits(logits, target, pos_weight)
    return ops.mse(logits, target)


class Forward:
    """Latents and reconstruction terms of one forward pass."""

    def __init__(self, z_x, z_a, z_a_obs, terms):
        self.z_x = z_x
        self.z_a = z_a
        self.z_a_obs = z_a_obs
        self.terms = terms


def paired_reconstruction_loss(model: SatModel, data: TrainingData, lambda_c: float, training: bool = True,
                               rng: Optional[np.random.Generator] = None, use_self: bool = True,
                               use_cross: bool = True, cross_struct_dest: str = "all"):
    """Self and cross reconstruction of attributes and structure.

    Returns ``(total, forward)``; ``forward.terms`` maps ``self_x``, ``self_a``,
    ``cross_x``, ``cross_a`` to scalar tensors (absent when disabled), and
    ``total = self_x + self_a + lambda_c * (cross_x + cross_a)``.
    """
    z_x = model.encode_attributes(data.x_obs, training, rng)
    z_a = model.encode_structure(data.structure, training, rng)
    z_a_obs = ops.gather_rows(z_a, data.obs_index)
    terms = {}
    kind, w_x = data.attr_kind, data.attr_pos_weight
    if use_self:
        terms["self_x"] = attribute_loss(model.decode_attributes(z_x), data.x_obs, kind, w_x)
        terms["self_a"] = ops.bce_with_logits(model.decode_structure_logits(z_a, z_a),
                                              data.adj_target, data.adj_pos_weight)
    if use_cross:
        terms["cross_x"] = attribute_loss(model.decode_attributes(z_a_obs), data.x_obs, kind, w_x)
        if cross_struct_dest == "all":
            logits = model.decode_structure_logits(z_x, z_a)
            target = data.adj_target[data.obs_index]
        else:
            logits = model.decode_structure_logits(z_x, z_a_obs)
            target = data.adj_target[np.ix_(data.obs_index, data.obs_index)]
        terms["cross_a"] = ops.bce_with_logits(logits, target, data.adj_pos_weight)
    total = None
    for name, t in terms.items():
        part = ops.scale(t, lambda_c) if name.startswith("cross") else t
        total = part if total is None else ops.add(total, part)
    if total is None:
        total = Tensor(np.array(0.0))
    if not np.isfinite(total.data):
        raise NonFiniteError("reconstruction loss is not finite")
    return total, Forward(z_x, z_a, z_a_obs, terms)


def adversarial_losses(model: SatModel, z_x: Tensor, z_a: Tensor, prior_rng: np.random.Generator,
                       saturating: bool = False):
    """Discriminator and generator losses for matching both latents to N(0, I).

    The discriminator loss counts a fresh prior batch once per latent source.
    The generator loss is the non-saturating ``-log D(z)`` form unless
    ``saturating`` is set, in which case it is ``log(1 - D(z))``.
    """
    z_px = Tensor(prior_rng.standard_normal(z_x.shape))
    z_pa = Tensor(prior_rng.standard_normal(z_a.shape))
    d_x, d_a = model.discriminate(z_x), model.discriminate(z_a)
    disc = ops.add(
        ops.add(ops.bce_with_logits(model.discriminate(z_px), 1.0), ops.bce_with_logits(d_x, 0.0)),
        ops.add(ops.bce_with_logits(model.discriminate(z_pa), 1.0), ops.bce_with_logits(d_a, 0.0)),
    )
    if saturating:
        gen = ops.scale(ops.add(ops.bce_with_logits(d_x, 0.0), ops.bce_with_logits(d_a, 0.0)), -1.0)
    else:
        gen = ops.add(ops.bce_with_logits(d_x, 1.0), ops.bce_with_logits(d_a, 1.0))
    if not (np.isfinite(disc.data) and np.isfinite(gen.data)):
        raise NonFiniteError("adversarial loss is not finite")
    return disc, gen


def regression_loss(model: SatModel, data: TrainingData, training: bool = True,
                    rng: Optional[np.random.Generator] = None):
    """Structure-to-attribute regression: the cross attribute term alone, unweighted."""
    z_a = model.encode_structure(data.structure, training, rng)
    z_a_obs = ops.gather_rows(z_a, data.obs_index)
    loss = attribute_loss(model.decode_attributes(z_a_obs), data.x_obs, data.attr_kind, data.attr_pos_weight)
    if not np.isfinite(loss.data):
        raise NonFiniteError("regression loss is not finite")
    return loss, Forward(None, z_a, z_a_obs, {"cross_x": loss})
