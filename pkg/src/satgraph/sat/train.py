"""Adversarial training loop with validation-based snapshot selection."""

from __future__ import annotations

import contextlib
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit
from threadpoolctl import threadpool_limits

from ..errors import ConfigError, DataError, DivergenceError, NonFiniteError
from ..eval.linkpred import auc_score
from ..eval.mmd import mmd
from ..eval.ranking import profile_scores
from ..graph.data import CATEGORICAL
from ..numerics import Adam, Tape, Tensor, ops
from .checkpoint import Checkpoint
from .losses import LossBreakdown, TrainingData, adversarial_losses, paired_reconstruction_loss, regression_loss
from .model import SatModel, TrainConfig

CURVE_COLUMNS = ("epoch", "self_x", "self_a", "cross_x", "cross_a", "gen_adv", "disc_adv", "gen_total",
                 "val_metric", "mmd_xa_train", "mmd_xa_val", "mmd_prior_train", "mmd_prior_val")
LOWER_IS_BETTER = {"mse"}


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    curves: list = field(default_factory=list)
    best_epoch: int = 0
    best_score: float = float("nan")
    selection_metric: str = ""
    gen_updates: int = 0
    disc_updates: int = 0


def resolve_selection_metric(config: TrainConfig, graph) -> str:
    if config.selection_metric is not None:
        return config.selection_metric
    if config.task == "link_prediction":
        return "auc"
    if graph.attr_kind == CATEGORICAL and graph.n_features >= 10:
        return "recall@10"
    return "mse"


def deterministic_context(config: TrainConfig):
    """Single BLAS thread when reproducibility is requested."""
    return threadpool_limits(limits=1) if config.deterministic else contextlib.nullcontext()


def _check_inputs(graph, split, config, link_split):
    split.validate(graph.n_nodes)
    if len(split.observed) == 0:
        raise DataError("training needs at least one attribute-observed node")
    if config.task == "link_prediction":
        if link_split is None:
            raise ConfigError("link prediction needs a link split")
        if len(link_split.val_pos) == 0 or len(link_split.val_neg) == 0:
            raise DataError("link split has no validation links")
    elif len(split.validation) == 0:
        raise DataError("node split has no validation nodes for model selection")


class _Validator:
    """Scores the current parameters on held-out data; eval mode, no tape."""

    def __init__(self, model, data, graph, split, metric, link_split):
        self.model, self.data, self.metric = model, data, metric
        self.val = split.validation
        self.link_split = link_split
        if metric == "auc":
            return
        self.x_val = graph.dense_attributes(self.val)
        self.truth = graph.attribute_sets(self.val)

    def __call__(self, z_a: Tensor) -> float:
        m = self.model
        if self.metric == "auc":
            emb = m.edge_embeddings(z_a).data
            ls = self.link_split
            pos = np.einsum("ij,ij->i", emb[ls.val_pos[:, 0]], emb[ls.val_pos[:, 1]])
            neg = np.einsum("ij,ij->i", emb[ls.val_neg[:, 0]], emb[ls.val_neg[:, 1]])
            return auc_score(pos, neg)
        logits = m.decode_attributes(Tensor(z_a.data[self.val])).data
        if self.metric == "mse":
            pred = expit(logits) if m.attr_kind == CATEGORICAL else logits
            return float(np.mean((pred - self.x_val) ** 2))
        return profile_scores(logits, self.truth, ks=(10,)).recall[10]


class _Diagnostics:
    """MMD between latent sources and against the prior on fixed node subsamples."""

    def __init__(self, graph, split, config):
        rng = np.random.default_rng([config.seed, 4])
        cap = config.mmd_sample

        def pick(ids):
            ids = np.asarray(ids)
            return np.sort(rng.choice(ids, size=cap, replace=False)) if len(ids) > cap else ids

        self.train_ids = pick(split.observed)
        self.val_ids = pick(split.validation)
        self.x_train = graph.dense_attributes(self.train_ids)
        self.x_val = graph.dense_attributes(self.val_ids)
        d = config.latent
        self.prior_train = rng.standard_normal((2 * len(self.train_ids), d))
        self.prior_val = rng.standard_normal((2 * len(self.val_ids), d))

    def __call__(self, model, z_a: Tensor) -> dict:
        out = {}
        for tag, ids, x, prior in (("train", self.train_ids, self.x_train, self.prior_train),
                                   ("val", self.val_ids, self.x_val, self.prior_val)):
            if len(ids) < 2:
                continue
            zx = model.encode_attributes(x).data
            za = z_a.data[ids]
            out[f"mmd_xa_{tag}"] = mmd(zx, za)
            out[f"mmd_prior_{tag}"] = mmd(np.vstack([zx, za]), prior)
        return out


def train(model: SatModel, graph, split, config: Optional[TrainConfig] = None, link_split=None,
          callback=None) -> TrainResult:
    """Fit ``model`` and return the parameter snapshot that scored best on validation.

    Each epoch runs ``gen_steps`` generator updates (reconstruction plus the
    generator side of the prior matching, on encoders and decoders) followed
    by ``disc_steps`` discriminator updates, each on a fresh forward pass.
    With ``link_split`` the structure seen during training is restricted to
    its training links. ``callback(epoch, row)`` is invoked after each epoch.
    """
    config = config or model.config
    _check_inputs(graph, split, config, link_split)
    metric = resolve_selection_metric(config, graph)
    edges = link_split.train_pos if config.task == "link_prediction" else None
    data = TrainingData.build(graph, split.observed, edges)
    regression = config.objective == "regression"
    use_adv = config.use_adv and not regression

    if regression:
        gen_params = model.enc_a.parameters() + model.dec_x.parameters()
    else:
        gen_params = model.generator_parameters()
    disc_params = model.discriminator_parameters()
    gen_opt = Adam(gen_params, lr=config.lr)
    disc_opt = Adam(disc_params, lr=config.lr)
    drop_rng = np.random.default_rng([config.seed, 2])
    prior_rng = np.random.default_rng([config.seed, 3])
    validate = _Validator(model, data, graph, split, metric, link_split)
    diagnose = None if regression else _Diagnostics(graph, split, config)
    lower = metric in LOWER_IS_BETTER

    result = TrainResult(checkpoint=None, selection_metric=metric)
    best_state = None
    with deterministic_context(config):
        for epoch in range(1, config.max_epochs + 1):
            try:
                row = _run_epoch(model, data, config, gen_opt, disc_opt, gen_params, disc_params,
                                 drop_rng, prior_rng, regression, use_adv, result)
                z_a = model.encode_structure(data.structure)
                score = validate(z_a)
                if not np.isfinite(score):
                    raise NonFiniteError(f"validation {metric} is not finite")
            except NonFiniteError as exc:
                raise DivergenceError(f"training diverged at epoch {epoch}: {exc}", epoch=epoch) from exc
            row["epoch"] = epoch
            row["val_metric"] = score
            if diagnose is not None and (epoch == 1 or epoch % config.mmd_every == 0):
                row.update(diagnose(model, z_a))
            result.curves.append(row)
            better = score < result.best_score if lower else score > result.best_score
            if best_state is None or better:
                result.best_score, result.best_epoch = score, epoch
                best_state = OrderedDict((k, v.copy()) for k, v in model.state_dict().items())
            if callback is not None:
                callback(epoch, row)

    kind = "gnn_regression" if regression else "sat"
    meta = {"epoch": result.best_epoch, "score": result.best_score, "selection_metric": metric,
            "n_nodes": graph.n_nodes, "n_features": graph.n_features, "attr_kind": graph.attr_kind}
    result.checkpoint = Checkpoint(kind, config.to_dict(), best_state, meta)
    return result


def _run_epoch(model, data, config, gen_opt, disc_opt, gen_params, disc_params, drop_rng, prior_rng,
               regression, use_adv, result) -> dict:
    parts = LossBreakdown()
    for _ in range(config.gen_steps):
        with Tape() as tape:
            if regression:
                loss, fwd = regression_loss(model, data, True, drop_rng)
            else:
                loss, fwd = paired_reconstruction_loss(model, data, config.lambda_c, True, drop_rng,
                                                       config.use_self, config.use_cross,
                                                       config.cross_struct_dest)
            if use_adv:
                _, gen = adversarial_losses(model, fwd.z_x, fwd.z_a, prior_rng, config.saturating_gen)
                loss = ops.add(loss, gen)
                parts.gen_adv += float(gen.data) / config.gen_steps
        grads = tape.gradient(loss, gen_params)
        _check_grads(grads)
        gen_opt.step(grads)
        result.gen_updates += 1
        for name, t in fwd.terms.items():
            setattr(parts, name, getattr(parts, name) + float(t.data) / config.gen_steps)
    if use_adv:
        for _ in range(config.disc_steps):
            z_x = Tensor(model.encode_attributes(data.x_obs, True, drop_rng).data)
            z_a = Tensor(model.encode_structure(data.structure, True, drop_rng).data)
            with Tape() as tape:
                disc, _ = adversarial_losses(model, z_x, z_a, prior_rng, config.saturating_gen)
            grads = tape.gradient(disc, disc_params)
            _check_grads(grads)
            disc_opt.step(grads)
            result.disc_updates += 1
            parts.disc_adv += float(disc.data) / config.disc_steps
    row = parts.to_dict()
    lam = 1.0 if regression else config.lambda_c
    row["gen_total"] = parts.generator_total(lam)
    if not all(np.isfinite(v) for v in row.values()):
        raise NonFiniteError("non-finite loss term")
    return row


def _check_grads(grads):
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("non-finite gradient")
