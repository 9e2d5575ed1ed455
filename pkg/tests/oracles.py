"""Independent brute-force references used to check the library.

Nothing here imports the code under test except plain data containers;
each function recomputes its quantity the slow, obvious way.
"""

import itertools
import math

import numpy as np


# -- ranking ----------------------------------------------------------------

def top_k(scores, k):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return order[:k]


def recall_oracle(scores, truth, k):
    truth = set(int(t) for t in truth)
    return len(set(top_k(list(scores), k)) & truth) / len(truth)


def ndcg_oracle(scores, truth, k):
    truth = set(int(t) for t in truth)
    dcg = sum(1.0 / math.log2(r + 2) for r, d in enumerate(top_k(list(scores), k)) if d in truth)
    idcg = sum(1.0 / math.log2(r + 2) for r in range(min(k, len(truth))))
    return dcg / idcg


def ndcg_permutation_oracle(scores, truth, k):
    """IDCG taken as the best DCG over every ordering of the dimensions."""
    truth = set(int(t) for t in truth)
    n = len(scores)

    def dcg(order):
        return sum(1.0 / math.log2(r + 2) for r, d in enumerate(order[:k]) if d in truth)

    best = max(dcg(p) for p in itertools.permutations(range(n)))
    return dcg(top_k(list(scores), k)) / best


# -- link metrics -----------------------------------------------------------

def auc_pairwise(pos, neg):
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def ap_pairwise(pos, neg):
    """Mean over positives of precision among all items scoring at least as high."""
    allv = list(pos) + list(neg)
    out = 0.0
    for s in pos:
        at_least = sum(1 for v in allv if v >= s)
        pos_at_least = sum(1 for v in pos if v >= s)
        out += pos_at_least / at_least
    return out / len(pos)


# -- model pieces, scalar loops ------------------------------------------------

def matmul_loops(a, b):
    n, m = len(a), len(b[0])
    inner = len(b)
    return [[sum(a[i][t] * b[t][j] for t in range(inner)) for j in range(m)] for i in range(n)]


def mlp_loops(x, w1, b1, w2, b2):
    h = matmul_loops(x, w1)
    h = [[max(0.0, h[i][j] + b1[j]) for j in range(len(b1))] for i in range(len(h))]
    o = matmul_loops(h, w2)
    return [[o[i][j] + b2[j] for j in range(len(b2))] for i in range(len(o))]


def norm_adj_loops(edges, n):
    nbrs = [{i} for i in range(n)]
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    deg = [len(s) for s in nbrs]
    return [[(1.0 / math.sqrt(deg[i] * deg[j]) if j in nbrs[i] else 0.0) for j in range(n)] for i in range(n)]


def gcn_loops(adj, w1, w2):
    h = matmul_loops(adj, w1)
    h = [[max(0.0, v) for v in row] for row in h]
    return matmul_loops(adj, matmul_loops(h, w2))


def softplus(x):
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def bce_loops(logits, target, w):
    total, count = 0.0, 0
    for i in range(len(logits)):
        for j in range(len(logits[0])):
            y, l = target[i][j], logits[i][j]
            total += w * y * softplus(-l) + (1 - y) * softplus(l)
            count += 1
    return total / count


def pos_weight_loops(target):
    flat = [v for row in target for v in row]
    nz = sum(1 for v in flat if v != 0)
    return (len(flat) - nz) / nz


def sat_recon_loss_loops(params, x_obs, obs, edges, n, lam):
    """Reconstruction loss of the paired streams, every product written as loops."""
    P = {k: v.tolist() for k, v in params.items()}
    adj = norm_adj_loops(edges, n)
    x = x_obs.tolist()

    def mlp(prefix, inp):
        return mlp_loops(inp, P[f"{prefix}.l1.weight"], P[f"{prefix}.l1.bias"],
                         P[f"{prefix}.l2.weight"], P[f"{prefix}.l2.bias"])

    z_x = mlp("enc_x", x)
    z_a = gcn_loops(adj, P["enc_a.w1"], P["enc_a.w2"])
    z_a_obs = [z_a[i] for i in obs]
    target = [[1.0 if (i == j or (min(i, j), max(i, j)) in edges) else 0.0 for j in range(n)] for i in range(n)]
    w_x = pos_weight_loops(x)
    w_a = pos_weight_loops(target)

    def scores(zs, zd):
        es, ed = mlp("dec_a", zs), mlp("dec_a", zd)
        return [[sum(a * b for a, b in zip(es[i], ed[j])) for j in range(len(ed))] for i in range(len(es))]

    self_x = bce_loops(mlp("dec_x", z_x), x, w_x)
    self_a = bce_loops(scores(z_a, z_a), target, w_a)
    cross_x = bce_loops(mlp("dec_x", z_a_obs), x, w_x)
    cross_a = bce_loops(scores(z_x, z_a), [target[i] for i in obs], w_a)
    return {"self_x": self_x, "self_a": self_a, "cross_x": cross_x, "cross_a": cross_a,
            "total": self_x + self_a + lam * (cross_x + cross_a)}


# -- MMD ----------------------------------------------------------------------

def mmd_loops(a, b, s):
    def k(x, y):
        return math.exp(-sum((p - q) ** 2 for p, q in zip(x, y)) / (2 * s * s))

    n, m = len(a), len(b)
    aa = sum(k(a[i], a[j]) for i in range(n) for j in range(n) if i != j) / (n * (n - 1))
    bb = sum(k(b[i], b[j]) for i in range(m) for j in range(m) if i != j) / (m * (m - 1))
    ab = sum(k(x, y) for x in a for y in b) / (n * m)
    return aa + bb - 2 * ab


def adam_oracle(theta, grads, lr, b1=0.9, b2=0.999, eps=1e-8):
    """Scalar Adam trajectory for a sequence of gradients."""
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
        out.append(theta)
    return out


def dense(m):
    return np.asarray(m, dtype=np.float64)
