"""Command-line entry point: ``satgraph <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import baselines
from .errors import ConfigError, DataError, SatGraphError
from .eval import (DEFAULT_KS, MetricReport, append_results, auc_ap, classify_nodes, export_embeddings,
                   induced_edges, pivot, pivot_csv, pivot_text, profile_scores, read_results, write_curves)
from .graph import (ATTR_KINDS, CATEGORICAL, LINK_RATIOS, NODE_RATIOS, LinkSplit, NodeSplit, load_graph_dir,
                    load_split, make_link_split, make_node_split, save_split)
from .graph.splits import check_ratios
from .sat import CURVE_COLUMNS, Checkpoint, SatModel, TrainConfig, complete_attributes, score_links, train

SAT_METHODS = {
    "sat-gcn": {"backbone": "gcn"},
    "sat-gat": {"backbone": "gat"},
    "sat-no-self": {"backbone": "gcn", "use_self": False},
    "sat-no-cross": {"backbone": "gcn", "use_cross": False},
    "sat-no-adver": {"backbone": "gcn", "use_adv": False},
}
BASELINE_METHODS = {"neighaggre", "vae", "gnn-gcn", "gnn-gat"}
METHODS = tuple(SAT_METHODS) + tuple(sorted(BASELINE_METHODS))

# cross-stream weights chosen on validation for each dataset and task
DEFAULT_LAMBDA = {
    "completion": {"cora": 10.0, "citeseer": 10.0, "pubmed": 50.0, "steam": 10.0, "coauthor-cs": 100.0,
                   "amazon-computer": 100.0, "amazon-photo": 100.0},
    "link_prediction": {"cora": 10.0, "citeseer": 10.0, "pubmed": 1.0, "steam": 10.0, "coauthor-cs": 0.1,
                        "amazon-computer": 0.1, "amazon-photo": 0.1},
}
FALLBACK_LAMBDA = 10.0
SPARSE_DATASETS = {"steam"}

CONFIG_NAME = "config.json"
CHECKPOINT_NAME = "checkpoint.bin"
CURVES_NAME = "curves.csv"
SPLIT_NAME = "split.json"
METRICS_NAME = "metrics.json"

# TrainConfig fields set by --method, --seed(s) or --lambda-c rather than by their own flag
_DERIVED_FIELDS = {"backbone", "use_self", "use_cross", "use_adv", "objective", "seed", "lambda_c", "task"}


def default_lambda(dataset: str, task: str) -> float:
    return DEFAULT_LAMBDA.get(task, {}).get(dataset.lower(), FALLBACK_LAMBDA)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load_graph(data, attr_kind):
    path = Path(data)
    if not path.is_dir():
        raise DataError(f"dataset directory not found: {path}")
    return load_graph_dir(path, attr_kind)


def _node_part(split):
    return split["node"] if isinstance(split, dict) else split


def _link_part(split):
    return split.get("link") if isinstance(split, dict) else (split if isinstance(split, LinkSplit) else None)


def _make_split(graph, task, seed, node_ratios=NODE_RATIOS, link_ratios=LINK_RATIOS):
    node = make_node_split(graph, node_ratios, seed)
    if task == "link_prediction":
        return {"node": node, "link": make_link_split(graph, link_ratios, seed)}
    return node


# -- split ------------------------------------------------------------------


def cmd_split(args) -> int:
    node_ratios = check_ratios(args.ratios) if args.ratios else NODE_RATIOS
    link_ratios = check_ratios(args.link_ratios) if args.link_ratios else LINK_RATIOS
    graph = _load_graph(args.data, args.attr_kind)
    split = _make_split(graph, args.task, args.seed, node_ratios, link_ratios)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_split(out, split)
    sizes = _node_part(split).sizes()
    print(f"wrote {out}: observed/validation/missing = {sizes[0]}/{sizes[1]}/{sizes[2]}")
    return 0


# -- train ------------------------------------------------------------------


def _train_overrides(args) -> dict:
    out = {}
    for f in fields(TrainConfig):
        if f.name in _DERIVED_FIELDS:
            continue
        value = getattr(args, f.name, None)
        if value is not None:
            out[f.name] = value
    return out


def resolve_run_configs(args) -> list:
    """Expand flags and an optional JSON file into one resolved config per (lambda, seed)."""
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
    method = args.method or base.get("method")
    if method not in METHODS:
        raise ConfigError(f"--method must be one of {METHODS}")
    task = args.task or base.get("task", "completion")
    if task == "link_prediction" and method not in SAT_METHODS:
        raise ConfigError(f"method {method!r} does not support link prediction")
    data = args.data or base.get("data")
    if not data:
        raise ConfigError("--data is required")
    dataset = args.dataset_name or base.get("dataset") or Path(data).name
    attr_kind = args.attr_kind or base.get("attr_kind", CATEGORICAL)
    train_cfg = dict(base.get("train", {}))
    train_cfg.update(_train_overrides(args))
    stored_seed = [base["seed"]] if "seed" in base else None
    seeds = args.seeds or ([args.seed] if args.seed is not None else None) or base.get("seeds") or stored_seed or [0]
    lambdas = args.lambda_c or ([base["train"]["lambda_c"]] if "lambda_c" in base.get("train", {})
                                else [default_lambda(dataset, task)])
    vae_cfg = dict(base.get("vae", {}))
    # the VAE shares the optimizer settings given on the command line
    vae_cfg.update({k: v for k, v in _train_overrides(args).items() if k in ("max_epochs", "lr")})
    split_path = args.split or base.get("split_source")
    runs = []
    for lam in lambdas:
        for seed in seeds:
            cfg = dict(train_cfg, lambda_c=float(lam), seed=int(seed), task=task)
            if method in SAT_METHODS:
                cfg.update(SAT_METHODS[method])
                cfg["objective"] = "sat"
                tc = TrainConfig.from_dict(cfg)
            elif method in ("gnn-gcn", "gnn-gat"):
                tc = baselines.regression_config(method.split("-")[1], TrainConfig.from_dict(cfg))
            else:
                tc = TrainConfig.from_dict(cfg)
            run = {"method": method, "task": task, "data": str(Path(data).resolve()), "dataset": dataset, "attr_kind": attr_kind,
                   "seed": int(seed), "split_source": split_path, "train": tc.to_dict()}
            if method == "vae":
                run["vae"] = baselines.VaeConfig.from_dict(dict(vae_cfg, seed=int(seed))).to_dict()
            runs.append(run)
    return runs


def run_name(run) -> str:
    return f"{run['method']}-lc{run['train']['lambda_c']:g}-s{run['seed']}"


def execute_run(run: dict, run_dir: Path, graph=None, quiet=True) -> Path:
    """Train one resolved config into a fresh directory; refuses to touch an existing one."""
    run_dir = Path(run_dir)
    if run_dir.exists():
        raise ConfigError(f"run directory already exists: {run_dir}")
    graph = graph or _load_graph(run["data"], run["attr_kind"])
    if run.get("split_source"):
        split = load_split(run["split_source"])
    else:
        split = _make_split(graph, run["task"], run["seed"])
    if run["task"] == "link_prediction" and _link_part(split) is None:
        raise ConfigError("link prediction needs a split file holding a link split")
    _node_part(split).validate(graph.n_nodes)
    method = run["method"]
    tc = TrainConfig.from_dict(run["train"])
    curves, columns = [], CURVE_COLUMNS
    if method in SAT_METHODS or method in ("gnn-gcn", "gnn-gat"):
        model = SatModel(graph.n_nodes, graph.n_features, tc, graph.attr_kind)
        cb = None if quiet else (lambda e, row: print(f"epoch {e}: val={row['val_metric']:.4f}", flush=True))
        res = train(model, graph, _node_part(split), tc, _link_part(split), callback=cb)
        ckpt, curves = res.checkpoint, res.curves
    elif method == "vae":
        fit = baselines.fit_vae(graph, _node_part(split), baselines.VaeConfig.from_dict(run["vae"]))
        ckpt, curves, columns = fit.checkpoint, fit.curves, ("epoch", "recon", "kl", "val_metric")
    else:
        meta = {"n_nodes": graph.n_nodes, "n_features": graph.n_features, "attr_kind": graph.attr_kind}
        ckpt = Checkpoint("neighaggre", {}, {}, meta)
    run_dir.mkdir(parents=True)
    ckpt.meta["method"] = method
    ckpt.save(run_dir / CHECKPOINT_NAME)
    save_split(run_dir / SPLIT_NAME, split)
    write_curves(run_dir / CURVES_NAME, curves, columns)
    (run_dir / CONFIG_NAME).write_text(json.dumps(run, sort_keys=True, indent=2) + "\n")
    return run_dir


def cmd_train(args) -> int:
    runs = resolve_run_configs(args)
    out = Path(args.out)
    targets = [out / run_name(r) for r in runs]
    clash = [str(t) for t in targets if t.exists()]
    if clash:
        raise ConfigError(f"run directories already exist: {', '.join(clash)}")
    graph = _load_graph(runs[0]["data"], runs[0]["attr_kind"])
    for run, target in zip(runs, targets):
        execute_run(run, target, graph, quiet=not args.verbose)
        print(f"wrote {target}")
    return 0


# -- inference helpers -----------------------------------------------------------


class Run:
    """A trained run directory, loaded read-only."""

    def __init__(self, path):
        self.path = Path(path)
        cfg = self.path / CONFIG_NAME
        if not cfg.exists():
            raise DataError(f"not a run directory (no {CONFIG_NAME}): {self.path}")
        self.config = json.loads(cfg.read_text())
        for name in (CHECKPOINT_NAME, SPLIT_NAME):
            if not (self.path / name).exists():
                raise DataError(f"run directory lacks {name}: {self.path}")
        self.checkpoint = Checkpoint.load(self.path / CHECKPOINT_NAME)
        self.split = load_split(self.path / SPLIT_NAME)
        self._graph = None

    @property
    def graph(self):
        if self._graph is None:
            self._graph = _load_graph(self.config["data"], self.config["attr_kind"])
        return self._graph

    @property
    def node_split(self) -> NodeSplit:
        return _node_part(self.split)

    @property
    def link_split(self):
        return _link_part(self.split)

    @property
    def message_edges(self):
        ls = self.link_split
        return ls.train_pos if self.config["task"] == "link_prediction" and ls is not None else None

    def complete(self, nodes) -> np.ndarray:
        kind = self.checkpoint.kind
        if kind in ("sat", "gnn_regression"):
            return complete_attributes(self.checkpoint, self.graph, nodes=nodes, edges=self.message_edges)
        if kind == "vae_latent_aggre":
            return baselines.vae_complete(self.checkpoint, self.graph, self.node_split, nodes)
        return baselines.neigh_aggre(self.graph, self.node_split, nodes)


def _node_set(run: Run, which: str) -> np.ndarray:
    s = run.node_split
    sets = {"missing": s.missing, "validation": s.validation, "observed": s.observed,
            "all": np.arange(run.graph.n_nodes)}
    if which not in sets:
        raise ConfigError(f"node set must be one of {sorted(sets)}")
    return sets[which]


def cmd_complete(args) -> int:
    run = Run(args.run)
    nodes = _node_set(run, args.nodes)
    values = run.complete(nodes)
    out = Path(args.out)
    with out.open("w") as fh:
        fh.write(",".join(["node"] + [f"x{j}" for j in range(values.shape[1])]) + "\n")
        for node, row in zip(nodes.tolist(), values):
            fh.write(",".join([str(node)] + [repr(float(v)) for v in row]) + "\n")
    print(f"wrote {out}: {len(nodes)} x {values.shape[1]}")
    return 0


def cmd_linkpred(args) -> int:
    run = Run(args.run)
    if run.checkpoint.kind != "sat":
        raise ConfigError("link scores need a SAT checkpoint")
    if args.pairs:
        try:
            pairs = np.loadtxt(args.pairs, dtype=np.int64, ndmin=2)
        except ValueError as exc:
            raise DataError(f"{args.pairs}: {exc}") from exc
        labels = np.full(len(pairs), -1)
    else:
        ls = run.link_split
        if ls is None:
            raise ConfigError("run has no link split; pass --pairs")
        pairs = np.vstack([ls.test_pos, ls.test_neg])
        labels = np.r_[np.ones(len(ls.test_pos), dtype=int), np.zeros(len(ls.test_neg), dtype=int)]
    edges = run.message_edges
    if edges is None and run.config["task"] == "link_prediction":
        raise ConfigError("link-prediction run lacks its training links")
    scores = score_links(run.checkpoint, run.graph, pairs, edges if edges is not None else run.graph.edges)
    with Path(args.out).open("w") as fh:
        fh.write("u\tv\tlabel\tscore\n")
        for (u, v), y, s in zip(pairs.tolist(), labels.tolist(), scores):
            fh.write(f"{u}\t{v}\t{y}\t{float(s)!r}\n")
    if (labels >= 0).all() and len(set(labels.tolist())) == 2:
        auc, ap = auc_ap(scores[labels == 1], scores[labels == 0])
        print(f"auc={auc:.4f} ap={ap:.4f}")
    return 0


# -- evaluate / report ---------------------------------------------------------------


def evaluate_run(run: Run, profiling=True, classification=False, link=True, ks=None, repeats=3,
                 clf_seed=None) -> MetricReport:
    cfg = run.config
    graph = run.graph
    seed = int(cfg["seed"])
    metrics, details = {}, {}
    if cfg["task"] == "link_prediction":
        if link:
            ls = run.link_split
            pos = score_links(run.checkpoint, graph, ls.test_pos, run.message_edges)
            neg = score_links(run.checkpoint, graph, ls.test_neg, run.message_edges)
            metrics["auc"], metrics["ap"] = auc_ap(pos, neg)
    else:
        missing = run.node_split.missing
        restored = run.complete(missing)
        if profiling:
            if graph.attr_kind == CATEGORICAL:
                ks = tuple(ks or (DEFAULT_KS if cfg["dataset"].lower() not in SPARSE_DATASETS else (3, 5, 10)))
                ks = tuple(k for k in ks if k <= graph.n_features)
                prof = profile_scores(restored, graph.attribute_sets(missing), ks)
                for k in ks:
                    metrics[f"recall@{k}"] = prof.recall[k]
                    metrics[f"ndcg@{k}"] = prof.ndcg[k]
                details["profiling"] = prof.to_dict()
            else:
                truth = graph.dense_attributes(missing)
                metrics["mse"] = float(np.mean((restored - truth) ** 2))
        if classification:
            if graph.labels is None:
                raise DataError("classification needs labels.tsv")
            labels = graph.labels[missing]
            sub_edges = induced_edges(graph.edges, missing)
            cs = seed if clf_seed is None else clf_seed
            for key, feats, clf in (("x_mlp", restored, "mlp"), ("ax_gcn", restored, "gcn"),
                                    ("a_gcn", None, "gcn")):
                res = classify_nodes(feats, labels, clf, sub_edges, repeats=repeats, seed=cs)
                metrics[f"acc_{key}"] = res.mean
                metrics[f"acc_{key}_sd"] = res.std
                details[f"classification_{key}"] = res.to_dict()
    meta = run.checkpoint.meta
    details["selected_epoch"] = meta.get("epoch")
    details["selection_score"] = meta.get("score")
    details["mmd"] = {"kernel": "rbf", "bandwidth": "median pairwise distance of pooled sample"}
    return MetricReport(cfg["method"], cfg["dataset"], seed, cfg["task"], cfg, metrics, details)


def cmd_evaluate(args) -> int:
    run = Run(args.run)
    report = evaluate_run(run, profiling=not args.no_profiling, classification=args.classify,
                          link=True, ks=args.ks, repeats=args.repeats, clf_seed=args.classify_seed)
    out = Path(args.out) if args.out else run.path.parent / "evaluations" / run.path.name / METRICS_NAME
    out.parent.mkdir(parents=True, exist_ok=True)
    report.write(out)
    index = Path(args.index) if args.index else run.path.parent / "results.csv"
    n = append_results(index, report, run=run.path.name)
    for name in sorted(report.metrics):
        print(f"{name}: {report.metrics[name]:.4f}")
    print(f"wrote {out}; appended {n} rows to {index}")
    return 0


def cmd_report(args) -> int:
    table = pivot(read_results(args.index))
    text = pivot_text(table)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(pivot_csv(table))
    return 0


def cmd_export_embeddings(args) -> int:
    run = Run(args.run)
    if run.checkpoint.kind not in ("sat", "gnn_regression"):
        raise ConfigError("embedding export needs a SAT or GNN-regression checkpoint")
    nodes = _node_set(run, args.nodes)
    if args.source == "attribute" and run.checkpoint.kind != "sat":
        raise ConfigError("attribute latents exist only for SAT checkpoints")
    export_embeddings(run.checkpoint, run.graph, nodes, args.out, args.source, run.message_edges)
    print(f"wrote {args.out}: {len(nodes)} rows")
    return 0


# -- parser ---------------------------------------------------------------------


def _add_train_flags(p):
    for f in fields(TrainConfig):
        if f.name in _DERIVED_FIELDS:
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            p.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=None)
        elif f.type in ("int", int):
            p.add_argument(flag, dest=f.name, type=int, default=None)
        elif f.type in ("float", float):
            p.add_argument(flag, dest=f.name, type=float, default=None)
        else:
            p.add_argument(flag, dest=f.name, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="satgraph", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="write a node (and link) split")
    p.add_argument("--data", required=True, help="directory with edges.tsv/attrs.tsv[/labels.tsv]")
    p.add_argument("--attr-kind", choices=ATTR_KINDS, default=CATEGORICAL)
    p.add_argument("--task", choices=("completion", "link_prediction"), default="completion")
    p.add_argument("--ratios", type=_float_list, help="observed,validation,missing node fractions")
    p.add_argument("--link-ratios", type=_float_list, help="train,val,test edge fractions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train one run per (lambda_c, seed)")
    p.add_argument("--data")
    p.add_argument("--dataset-name")
    p.add_argument("--attr-kind", choices=ATTR_KINDS)
    p.add_argument("--config", help="JSON file with run settings; flags override it")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--task", choices=("completion", "link_prediction"))
    p.add_argument("--split", help="pin this split file instead of drawing one per seed")
    p.add_argument("--lambda-c", type=_float_list, help="one value or a comma-separated sweep")
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--out", required=True, help="parent directory for run directories")
    p.add_argument("--verbose", action="store_true")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("complete", help="write restored attributes of a node set")
    p.add_argument("--run", required=True)
    p.add_argument("--nodes", default="missing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("linkpred", help="score node pairs (default: the test links and non-links)")
    p.add_argument("--run", required=True)
    p.add_argument("--pairs", help="whitespace-separated u v per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_linkpred)

    p = sub.add_parser("evaluate", help="compute metrics.json and append to the results index")
    p.add_argument("--run", required=True)
    p.add_argument("--out")
    p.add_argument("--index")
    p.add_argument("--no-profiling", action="store_true")
    p.add_argument("--classify", action="store_true")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--classify-seed", type=int)
    p.add_argument("--ks", type=_int_list)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="pivot the results index into a comparison table")
    p.add_argument("--index", required=True)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-embeddings", help="write latent codes as CSV")
    p.add_argument("--run", required=True)
    p.add_argument("--nodes", default="all")
    p.add_argument("--source", choices=("structure", "attribute"), default="structure")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_embeddings)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SatGraphError as exc:
        print(f"satgraph: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"satgraph: error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
