"""Seeded node and link splits, serialized to ``split.json``."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError
from .data import AttributedGraph, canonical_edges

NODE_RATIOS = (0.4, 0.1, 0.5)
LINK_RATIOS = (0.6, 0.2, 0.2)
NEGATIVE_ATTEMPTS_PER_SAMPLE = 100


def check_ratios(ratios, n_parts=3):
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != n_parts or any(r < 0 for r in ratios) or not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ConfigError(f"split ratios must be {n_parts} non-negative numbers summing to 1, got {ratios}")
    return ratios


@dataclass(frozen=True, eq=False)
class NodeSplit:
    observed: np.ndarray
    validation: np.ndarray
    missing: np.ndarray
    seed: int
    ratios: tuple = NODE_RATIOS

    def __post_init__(self):
        for name in ("observed", "validation", "missing"):
            object.__setattr__(self, name, np.sort(np.asarray(getattr(self, name), dtype=np.int64)))

    @property
    def n_nodes(self):
        return len(self.observed) + len(self.validation) + len(self.missing)

    def sizes(self):
        return len(self.observed), len(self.validation), len(self.missing)

    def validate(self, n_nodes: int) -> None:
        allv = np.concatenate([self.observed, self.validation, self.missing])
        if len(allv) != n_nodes or not np.array_equal(np.sort(allv), np.arange(n_nodes)):
            raise DataError("node split is not a partition of the node set")

    def to_dict(self):
        return {"kind": "node", "seed": int(self.seed), "ratios": list(self.ratios),
                "observed": self.observed.tolist(), "validation": self.validation.tolist(),
                "missing": self.missing.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["observed"], dtype=np.int64), np.array(d["validation"], dtype=np.int64),
                   np.array(d["missing"], dtype=np.int64), int(d["seed"]), tuple(d.get("ratios", NODE_RATIOS)))

    def __eq__(self, other):
        return (isinstance(other, NodeSplit) and self.seed == other.seed
                and all(np.array_equal(getattr(self, k), getattr(other, k))
                        for k in ("observed", "validation", "missing")))


@dataclass(frozen=True, eq=False)
class LinkSplit:
    train_pos: np.ndarray
    val_pos: np.ndarray
    test_pos: np.ndarray
    val_neg: np.ndarray
    test_neg: np.ndarray
    seed: int
    ratios: tuple = LINK_RATIOS

    _FIELDS = ("train_pos", "val_pos", "test_pos", "val_neg", "test_neg")

    def __post_init__(self):
        for name in self._FIELDS:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64).reshape(-1, 2))

    def to_dict(self):
        d = {"kind": "link", "seed": int(self.seed), "ratios": list(self.ratios)}
        d.update({k: getattr(self, k).tolist() for k in self._FIELDS})
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(*(np.array(d[k], dtype=np.int64).reshape(-1, 2) for k in cls._FIELDS),
                   int(d["seed"]), tuple(d.get("ratios", LINK_RATIOS)))

    def __eq__(self, other):
        return (isinstance(other, LinkSplit) and self.seed == other.seed
                and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in self._FIELDS))


def _nearest(x: float) -> int:
    return int(math.floor(x + 0.5))


def make_node_split(graph, ratios=NODE_RATIOS, seed: int = 0) -> NodeSplit:
    """Seeded uniform partition into observed / validation / missing node sets.

    Observed and validation sizes are ``ratio * N`` rounded to the nearest
    integer; the missing set takes the remainder.
    """
    ratios = check_ratios(ratios)
    n = graph.n_nodes if isinstance(graph, AttributedGraph) else int(graph)
    perm = np.random.default_rng(seed).permutation(n)
    n_obs = _nearest(ratios[0] * n)
    n_val = min(_nearest(ratios[1] * n), n - n_obs)
    return NodeSplit(perm[:n_obs], perm[n_obs:n_obs + n_val], perm[n_obs + n_val:], seed, ratios)


def _edge_keys(edges, n):
    return edges[:, 0] * np.int64(n) + edges[:, 1]


def sample_negatives(n_nodes: int, edges, count: int, rng: np.random.Generator, exclude=()) -> np.ndarray:
    """Uniform non-edges ``u < v`` by rejection; never self-pairs, never repeated.

    ``exclude`` holds extra canonical pairs that must not be drawn.
    """
    edges = canonical_edges(edges, n_nodes)
    pool = n_nodes * (n_nodes - 1) // 2 - len(edges) - len(exclude)
    if count > pool:
        raise DataError(f"cannot sample {count} non-edges: only {pool} available")
    taken = set(_edge_keys(edges, n_nodes).tolist())
    taken.update(int(u) * n_nodes + int(v) for u, v in exclude)
    out = []
    budget = NEGATIVE_ATTEMPTS_PER_SAMPLE * max(count, 1)
    attempts = 0
    while len(out) < count:
        if attempts >= budget:
            raise DataError(f"negative sampling exhausted its budget after {attempts} draws")
        batch = min(max(2 * (count - len(out)), 16), budget - attempts)
        pairs = rng.integers(0, n_nodes, size=(batch, 2))
        attempts += batch
        for u, v in pairs.tolist():
            if u == v:
                continue
            if u > v:
                u, v = v, u
            key = u * n_nodes + v
            if key in taken:
                continue
            taken.add(key)
            out.append((u, v))
            if len(out) == count:
                break
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def make_link_split(graph: AttributedGraph, ratios=LINK_RATIOS, seed: int = 0) -> LinkSplit:
    """Seeded 60/20/20 edge partition with as many sampled non-edges as val/test positives."""
    ratios = check_ratios(ratios)
    edges = graph.edges
    if len(edges) < 5:
        raise DataError("link split needs at least 5 edges")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(edges))
    n_train = int(math.floor(ratios[0] * len(edges)))
    n_val = int(math.floor(ratios[1] * len(edges)))
    train = edges[np.sort(perm[:n_train])]
    val = edges[np.sort(perm[n_train:n_train + n_val])]
    test = edges[np.sort(perm[n_train + n_val:])]
    negs = sample_negatives(graph.n_nodes, edges, len(val) + len(test), rng)
    return LinkSplit(train, val, test, negs[:len(val)], negs[len(val):], seed, ratios)


def save_split(path, split) -> None:
    """Write a split (or a ``{"node": ..., "link": ...}`` bundle) as JSON."""
    Path(path).write_text(json.dumps(split_to_dict(split), sort_keys=True) + "\n")


def split_to_dict(split):
    if isinstance(split, (NodeSplit, LinkSplit)):
        return split.to_dict()
    if isinstance(split, dict):
        return {"kind": "bundle", **{k: v.to_dict() for k, v in split.items()}}
    raise TypeError(f"not a split: {type(split).__name__}")


def split_from_dict(d):
    kind = d.get("kind")
    if kind == "node":
        return NodeSplit.from_dict(d)
    if kind == "link":
        return LinkSplit.from_dict(d)
    if kind == "bundle":
        return {k: split_from_dict(v) for k, v in d.items() if k != "kind"}
    raise DataError(f"unknown split kind {kind!r}")


def load_split(path):
    try:
        return split_from_dict(json.loads(Path(path).read_text()))
    except (KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: malformed split file ({exc})") from exc
