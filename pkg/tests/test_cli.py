import csv
import json
import subprocess
import sys

import pytest

from satgraph.cli import main
from satgraph.graph import citation_like, save_graph, two_block_sbm

SMALL = ["--hidden", "8", "--latent", "4", "--edge-dim", "4", "--max-epochs", "3"]


@pytest.fixture(scope="module")
def sbm_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data") / "sbm"
    save_graph(two_block_sbm(seed=0), d)
    return d


@pytest.fixture(scope="module")
def cite_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data") / "cite"
    save_graph(citation_like(n_nodes=80, n_classes=3, n_features=30, n_edges=160, avg_hot=5, seed=0), d)
    return d


def snapshot(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_split_is_byte_identical_per_seed(sbm_dir, tmp_path):
    for name in ("a", "b"):
        assert main(["split", "--data", str(sbm_dir), "--seed", "4", "--out", str(tmp_path / f"{name}.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert main(["split", "--data", str(sbm_dir), "--seed", "5", "--out", str(tmp_path / "c.json")]) == 0
    assert (tmp_path / "c.json").read_bytes() != (tmp_path / "a.json").read_bytes()


def test_bad_ratios_exit_with_config_code(sbm_dir, tmp_path):
    code = main(["split", "--data", str(sbm_dir), "--ratios", "0.5,0.5,0.5", "--out", str(tmp_path / "s.json")])
    assert code == 2 and not (tmp_path / "s.json").exists()


def test_missing_data_exits_with_data_code(tmp_path):
    assert main(["split", "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "s.json")]) == 3
    assert main(["evaluate", "--run", str(tmp_path)]) == 3


def test_divergence_exits_with_code_four(sbm_dir, tmp_path):
    code = main(["train", "--data", str(sbm_dir), "--method", "sat-gcn", "--lr", "1e300", *SMALL,
                 "--out", str(tmp_path / "runs")])
    assert code == 4


def test_lambda_sweep_makes_one_run_per_value(sbm_dir, tmp_path):
    out = tmp_path / "runs"
    lams = "0.1,1,2,5,10,20,50,100"
    assert main(["train", "--data", str(sbm_dir), "--method", "sat-gcn", "--lambda-c", lams, "--max-epochs", "1",
                 "--hidden", "4", "--latent", "2", "--edge-dim", "2", "--out", str(out)]) == 0
    dirs = sorted(p.name for p in out.iterdir())
    assert len(dirs) == 8 and "sat-gcn-lc0.1-s0" in dirs and "sat-gcn-lc100-s0" in dirs
    cfg = json.loads((out / "sat-gcn-lc50-s0" / "config.json").read_text())
    assert cfg["train"]["lambda_c"] == 50.0 and cfg["method"] == "sat-gcn"


def test_no_adver_run_has_zero_discriminator_column(sbm_dir, tmp_path):
    out = tmp_path / "runs"
    assert main(["train", "--data", str(sbm_dir), "--method", "sat-no-adver", *SMALL, "--out", str(out)]) == 0
    (run,) = out.iterdir()
    rows = list(csv.DictReader((run / "curves.csv").open()))
    assert len(rows) == 3 and all(float(r["disc_adv"]) == 0 and float(r["gen_adv"]) == 0 for r in rows)


def test_existing_run_directory_is_left_alone(sbm_dir, tmp_path):
    out = tmp_path / "runs"
    args = ["train", "--data", str(sbm_dir), "--method", "sat-gcn", *SMALL, "--out", str(out)]
    assert main(args) == 0
    before = snapshot(out)
    assert main(args) == 2
    assert snapshot(out) == before


def test_full_pipeline_is_reproducible(cite_dir, tmp_path):
    runs = tmp_path / "runs"
    for method in ("sat-gcn", "neighaggre", "vae", "gnn-gcn"):
        assert main(["train", "--data", str(cite_dir), "--method", method, "--seeds", "0,1", *SMALL,
                     "--out", str(runs)]) == 0
    run = runs / "sat-gcn-lc10-s0"
    assert main(["evaluate", "--run", str(run)]) == 0
    metrics = runs / "evaluations" / run.name / "metrics.json"
    first = metrics.read_bytes()
    assert main(["evaluate", "--run", str(run)]) == 0
    assert metrics.read_bytes() == first
    m = json.loads(first)["metrics"]
    assert set(m) >= {"recall@10", "recall@20", "ndcg@10", "ndcg@20"} and "recall@50" not in m

    for name in sorted(p.name for p in runs.iterdir() if p.name.startswith(("neigh", "vae", "gnn"))):
        assert main(["evaluate", "--run", str(runs / name)]) == 0
    rows = list(csv.DictReader((runs / "results.csv").open()))
    assert [r["run"] for r in rows[:4]] == [run.name] * 4
    assert rows[-1]["run"] == "vae-lc10-s1"

    assert main(["report", "--index", str(runs / "results.csv"), "--out", str(tmp_path / "t.csv")]) == 0
    table = (tmp_path / "t.csv").read_text().splitlines()
    assert table[0] == "method,metric,mean,sd,n"
    assert any(line.startswith("gnn-gcn,recall@10,") and line.endswith(",2") for line in table)

    assert main(["complete", "--run", str(run), "--out", str(tmp_path / "c.csv")]) == 0
    assert (tmp_path / "c.csv").read_text().count("\n") == 1 + 40
    assert main(["export-embeddings", "--run", str(run), "--nodes", "missing", "--out", str(tmp_path / "z.csv")]) == 0
    assert (tmp_path / "z.csv").read_text().startswith("node,z0,z1,z2,z3\n")


def test_classification_metrics(cite_dir, tmp_path):
    runs = tmp_path / "runs"
    assert main(["train", "--data", str(cite_dir), "--method", "neighaggre", "--out", str(runs)]) == 0
    assert main(["evaluate", "--run", str(runs / "neighaggre-lc10-s0"), "--classify", "--repeats", "1",
                 "--out", str(tmp_path / "m.json")]) == 0
    m = json.loads((tmp_path / "m.json").read_text())["metrics"]
    assert {"acc_x_mlp", "acc_ax_gcn", "acc_a_gcn", "acc_x_mlp_sd"} <= set(m)
    assert all(0 <= m[k] <= 1 for k in ("acc_x_mlp", "acc_ax_gcn", "acc_a_gcn"))


def test_link_prediction_run(cite_dir, tmp_path):
    runs = tmp_path / "runs"
    assert main(["train", "--data", str(cite_dir), "--method", "sat-gcn", "--task", "link_prediction", *SMALL,
                 "--out", str(runs)]) == 0
    run = runs / "sat-gcn-lc10-s0"
    assert json.loads((run / "split.json").read_text())["kind"] == "bundle"
    assert main(["evaluate", "--run", str(run), "--out", str(tmp_path / "m.json")]) == 0
    m = json.loads((tmp_path / "m.json").read_text())["metrics"]
    assert set(m) == {"auc", "ap"}
    assert main(["linkpred", "--run", str(run), "--out", str(tmp_path / "s.tsv")]) == 0
    lines = (tmp_path / "s.tsv").read_text().splitlines()
    assert lines[0] == "u\tv\tlabel\tscore" and len(lines) == 1 + 32 + 32
    code = main(["train", "--data", str(cite_dir), "--method", "vae", "--task", "link_prediction",
                 "--out", str(runs)])
    assert code == 2


def test_stored_config_reproduces_checkpoint(sbm_dir, tmp_path):
    first = tmp_path / "a"
    assert main(["train", "--data", str(sbm_dir), "--method", "sat-gat", "--seed", "3", "--lambda-c", "2",
                 "--dropout", "0.3", *SMALL, "--out", str(first)]) == 0
    (run,) = first.iterdir()
    again = tmp_path / "b"
    assert main(["train", "--config", str(run / "config.json"), "--out", str(again)]) == 0
    twin = again / run.name
    assert (twin / "checkpoint.bin").read_bytes() == (run / "checkpoint.bin").read_bytes()
    assert (twin / "config.json").read_bytes() == (run / "config.json").read_bytes()


def test_pinned_split_is_used(sbm_dir, tmp_path):
    split = tmp_path / "s.json"
    assert main(["split", "--data", str(sbm_dir), "--seed", "9", "--out", str(split)]) == 0
    runs = tmp_path / "runs"
    assert main(["train", "--data", str(sbm_dir), "--method", "neighaggre", "--seeds", "0,1", "--split", str(split),
                 "--out", str(runs)]) == 0
    for s in (0, 1):
        assert (runs / f"neighaggre-lc10-s{s}" / "split.json").read_bytes() == split.read_bytes()


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "satgraph.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("split", "train", "complete", "linkpred", "evaluate", "report", "export-embeddings"):
        assert cmd in out.stdout
