"""Run artifacts: metrics.json, curves.csv, the append-only results index and pivots."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError

INDEX_FIELDS = ("method", "dataset", "seed", "metric", "value", "run")


@dataclass
class MetricReport:
    """Everything one evaluation produced, plus the config that produced it."""

    method: str
    dataset: str
    seed: int
    task: str
    config: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"method": self.method, "dataset": self.dataset, "seed": self.seed, "task": self.task,
                "config": self.config, "metrics": self.metrics, "details": self.details}

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), sort_keys=True, indent=2) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path


def _plain(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def write_curves(path, curves, columns) -> Path:
    """One row per epoch; missing entries (skipped diagnostics) are left blank."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in curves:
            w.writerow([_cell(row.get(c)) for c in columns])
    return path


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def read_curves(path) -> list:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (float(v) if v not in ("", None) else None) for k, v in r.items()} for r in rows]


def append_results(index_path, report: MetricReport, run: str = "") -> int:
    """Append one row per metric in ``report.metrics``; returns the number of rows written."""
    index_path = Path(index_path)
    new = not index_path.exists()
    index_path.parent.mkdir(parents=True, exist_ok=True)
    with index_path.open("a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(INDEX_FIELDS)
        for name in sorted(report.metrics):
            value = _plain(report.metrics[name])
            w.writerow([report.method, report.dataset, report.seed, name,
                        "" if value is None else repr(value), run])
    return len(report.metrics)


def read_results(index_path) -> list:
    index_path = Path(index_path)
    if not index_path.exists():
        raise DataError(f"results index not found: {index_path}")
    with index_path.open() as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["seed"] = int(r["seed"])
        r["value"] = float(r["value"]) if r["value"] else float("nan")
    return rows


@dataclass
class PivotRow:
    method: str
    metric: str
    mean: float
    sd: float
    n: int
    lo: float
    hi: float
    seeds: list


def pivot(rows) -> list:
    """Mean and sample sd over seeds per (method, metric), sorted by method then metric.

    When a seed appears more than once for the same pair, its latest row wins.
    """
    if not rows:
        raise DataError("results index is empty")
    groups = {}
    for r in rows:
        groups.setdefault((r["method"], r["metric"]), {})[r["seed"]] = r["value"]
    out = []
    for (method, metric) in sorted(groups):
        by_seed = groups[(method, metric)]
        vals = np.array([by_seed[s] for s in sorted(by_seed)], dtype=np.float64)
        sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else float("nan")
        out.append(PivotRow(method, metric, float(np.mean(vals)), sd, len(vals), float(vals.min()),
                            float(vals.max()), sorted(by_seed)))
    return out


def pivot_csv(table) -> str:
    lines = ["method,metric,mean,sd,n"]
    for p in table:
        sd = "" if math.isnan(p.sd) else f"{p.sd:.6f}"
        lines.append(f"{p.method},{p.metric},{p.mean:.6f},{sd},{p.n}")
    return "\n".join(lines) + "\n"


def pivot_text(table) -> str:
    header = ("method", "metric", "mean", "sd", "n")
    cells = [header] + [(p.method, p.metric, f"{p.mean:.4f}", "-" if math.isnan(p.sd) else f"{p.sd:.4f}",
                         str(p.n)) for p in table]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells) + "\n"
