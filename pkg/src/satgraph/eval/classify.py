"""Node classification on restored attributes with MLP and GCN classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.model_selection import StratifiedKFold, train_test_split

from ..errors import ConfigError, DataError
from ..graph.data import normalize_adjacency
from ..numerics import Adam, Tape, Tensor, glorot_init, ops, zeros

CLASSIFIERS = ("mlp", "gcn")


@dataclass
class ClassificationResult:
    mean: float
    std: float
    classifier: str
    mode: str
    accuracies: list = field(default_factory=list)
    folds: int = 5
    repeats: int = 3
    seed: int = 0

    def to_dict(self):
        return {"accuracy_mean": self.mean, "accuracy_std": self.std, "classifier": self.classifier,
                "mode": self.mode, "accuracies": list(self.accuracies), "folds": self.folds,
                "repeats": self.repeats, "seed": self.seed}


def induced_edges(edges, nodes) -> np.ndarray:
    """Edges with both endpoints in ``nodes``, relabelled to positions in ``nodes``."""
    nodes = np.asarray(nodes, dtype=np.int64)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    pos = {int(v): i for i, v in enumerate(nodes)}
    keep = [(pos[u], pos[v]) for u, v in edges.tolist() if u in pos and v in pos]
    return np.array(keep, dtype=np.int64).reshape(-1, 2)


class _Classifier:
    def __init__(self, kind, n_in, n_hidden, n_classes, rng, adj=None):
        self.kind, self.adj = kind, adj
        self.w1 = glorot_init((n_in, n_hidden), rng)
        self.b1 = zeros((n_hidden,))
        self.w2 = glorot_init((n_hidden, n_classes), rng)
        self.b2 = zeros((n_classes,))

    def params(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def __call__(self, x, training, rng, rate):
        if self.kind == "mlp":
            h = ops.relu(ops.add_bias(ops.matmul(x, self.w1), self.b1))
            h = ops.dropout(h, rate, training, rng)
            return ops.add_bias(ops.matmul(h, self.w2), self.b2)
        xw = self.w1 if x is None else ops.matmul(x, self.w1)
        h = ops.relu(ops.add_bias(ops.spmm(self.adj, xw), self.b1))
        h = ops.dropout(h, rate, training, rng)
        return ops.add_bias(ops.spmm(self.adj, ops.matmul(h, self.w2)), self.b2)


def _fit_predict(kind, x, labels, adj, train_idx, stop_idx, test_idx, n_classes, rng, hidden, lr, rate,
                 max_epochs, patience):
    n_in = x.shape[1] if x is not None else len(labels)
    model = _Classifier(kind, n_in, hidden, n_classes, rng, adj)
    opt = Adam(model.params(), lr=lr)
    xt = None if x is None else Tensor(x)
    # rows are only sliced for the MLP; the GCN needs the whole graph
    best, best_loss, waited = [p.data for p in model.params()], np.inf, 0
    for _ in range(max_epochs):
        with Tape() as tape:
            if kind == "mlp":
                logits = model(Tensor(x[train_idx]), True, rng, rate)
                loss = ops.softmax_cross_entropy(logits, labels[train_idx])
            else:
                logits = ops.gather_rows(model(xt, True, rng, rate), train_idx)
                loss = ops.softmax_cross_entropy(logits, labels[train_idx])
        opt.step(tape.gradient(loss, model.params()))
        if len(stop_idx):
            out = model(Tensor(x[stop_idx]), False, None, rate) if kind == "mlp" else \
                ops.gather_rows(model(xt, False, None, rate), stop_idx)
            stop_loss = float(ops.softmax_cross_entropy(out, labels[stop_idx]).data)
            if stop_loss < best_loss:
                best_loss, waited = stop_loss, 0
                best = [p.data for p in model.params()]
            else:
                waited += 1
                if waited >= patience:
                    break
    if len(stop_idx):
        for p, b in zip(model.params(), best):
            p.data = b
    out = model(Tensor(x[test_idx]), False, None, rate).data if kind == "mlp" else \
        model(xt, False, None, rate).data[test_idx]
    return float(np.mean(out.argmax(axis=1) == labels[test_idx]))


def classify_nodes(features: Optional[np.ndarray], labels, classifier: str = "mlp", edges=None,
                   folds: int = 5, repeats: int = 3, seed: int = 0, hidden: int = 64, lr: float = 0.005,
                   dropout: float = 0.5, max_epochs: int = 300, patience: int = 20) -> ClassificationResult:
    """Stratified k-fold accuracy, repeated with reshuffled folds.

    ``features=None`` with the GCN classifier means structure only (identity
    features). ``edges`` index rows of ``features``/``labels``. A stratified
    10% slice of each training fold drives early stopping on cross-entropy.
    """
    if classifier not in CLASSIFIERS:
        raise ConfigError(f"classifier must be one of {CLASSIFIERS}")
    if labels is None:
        raise DataError("node classification needs labels")
    labels = np.asarray(labels, dtype=np.int64)
    if np.any(labels < 0):
        raise DataError("node classification needs a label for every node")
    n = len(labels)
    if features is not None:
        features = np.asarray(features, dtype=np.float64)
        if len(features) != n:
            raise DataError("features and labels disagree on the node count")
    adj = None
    if classifier == "gcn":
        if edges is None:
            raise ConfigError("the GCN classifier needs edges")
        adj = normalize_adjacency(edges, n)
        mode = "A" if features is None else "A+X"
    else:
        if features is None:
            raise ConfigError("the MLP classifier needs features")
        mode = "X"
    # dense class ids so the output layer has no dead units
    classes, labels = np.unique(labels, return_inverse=True)
    accs = []
    for r in range(repeats):
        skf = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed * 1000 + r)
        for f, (train_idx, test_idx) in enumerate(skf.split(np.zeros(n), labels)):
            rng = np.random.default_rng([seed, r, f])
            counts = np.bincount(labels[train_idx])
            strat = labels[train_idx] if counts[counts > 0].min() >= 2 else None
            fit_idx, stop_idx = train_test_split(train_idx, test_size=0.1, stratify=strat,
                                                 random_state=seed * 1000 + r * 10 + f)
            accs.append(_fit_predict(classifier, features, labels, adj, np.sort(fit_idx), np.sort(stop_idx),
                                     test_idx, len(classes), rng, hidden, lr, dropout, max_epochs, patience))
    return ClassificationResult(float(np.mean(accs)), float(np.std(accs)), classifier, mode, accs,
                                folds, repeats, seed)
