"""Convert a Planetoid-format citation dataset (``ind.<name>.*`` pickles) to the TSV layout.

    python tools/planetoid_to_tsv.py --raw path/to/planetoid/data --name cora --out data/cora

Writes ``edges.tsv``, ``attrs.tsv`` and ``labels.tsv``. Test-set rows are put
back into node-id order, the usual preprocessing for these archives. Test
ids missing from the archive (isolated nodes in Citeseer) get all-zero
attributes and label 0; the count is printed.
"""

import argparse
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph")


def _load(raw, name, part):
    with open(Path(raw) / f"ind.{name}.{part}", "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def read_planetoid(raw, name):
    """Return ``(features csr, labels, edges, n_padded)`` in node-id order."""
    obj = {p: _load(raw, name, p) for p in PARTS}
    test_index = [int(line) for line in (Path(raw) / f"ind.{name}.test.index").read_text().split()]
    test_sorted = np.sort(test_index)
    allx, tx = sp.csr_matrix(obj["allx"]), sp.csr_matrix(obj["tx"])
    ally, ty = np.asarray(obj["ally"]), np.asarray(obj["ty"])

    span = test_sorted[-1] - test_sorted[0] + 1
    n_missing = 0
    if span != len(test_sorted):
        # pad the test block so positions match ids
        full_tx = sp.lil_matrix((span, tx.shape[1]))
        full_tx[test_sorted - test_sorted[0], :] = tx
        full_ty = np.zeros((span, ty.shape[1]))
        full_ty[test_sorted - test_sorted[0], :] = ty
        n_missing = span - len(test_sorted)
        tx, ty = full_tx.tocsr(), full_ty

    features = sp.vstack([allx, tx]).tolil()
    labels = np.vstack([ally, ty])
    features[test_index, :] = features[test_sorted, :]
    labels[test_index, :] = labels[test_sorted, :]
    features = features.tocsr()
    n = features.shape[0]

    edges = set()
    for u, nbrs in obj["graph"].items():
        for v in nbrs:
            u_, v_ = int(u), int(v)
            if u_ != v_ and u_ < n and v_ < n:
                edges.add((min(u_, v_), max(u_, v_)))
    return features, labels.argmax(axis=1), np.array(sorted(edges), dtype=np.int64).reshape(-1, 2), n_missing


def write_tsv(out, features, labels, edges):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    coo = features.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(out / "attrs.tsv", "w") as fh:
        fh.write(f"{features.shape[0]}\t{features.shape[1]}\n")
        for i in order:
            v = float(coo.data[i])
            if v != 0.0:
                fh.write(f"{coo.row[i]}\t{coo.col[i]}\t{v!r}\n")
    with open(out / "edges.tsv", "w") as fh:
        for u, v in edges.tolist():
            fh.write(f"{u}\t{v}\n")
    with open(out / "labels.tsv", "w") as fh:
        for i, y in enumerate(labels.tolist()):
            fh.write(f"{i}\t{y}\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--raw", required=True, help="directory holding ind.<name>.* files")
    ap.add_argument("--name", required=True, help="dataset name, e.g. cora or citeseer")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    features, labels, edges, n_missing = read_planetoid(args.raw, args.name)
    write_tsv(args.out, features, labels, edges)
    print(f"{args.name}: {features.shape[0]} nodes, {len(edges)} edges, {features.shape[1]} attributes, "
          f"{labels.max() + 1} classes; {n_missing} padded test rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
