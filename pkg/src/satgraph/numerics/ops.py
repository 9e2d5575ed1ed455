"""Differentiable operations on :class:`Tensor`.

Each function computes its forward value eagerly and, when a tape is active
and an input is tracked, records a closure mapping the output gradient to
input gradients. Binary elementwise ops require equal shapes; biases go
through :func:`add_bias`.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse as sp
from scipy.special import expit

from ..errors import NonFiniteError, ShapeError
from .sparse import SparseMatrix
from .tensor import DTYPE, Tensor, current_tape


def _emit(out_data, inputs, backward, op):
    out = Tensor(out_data)
    tape = current_tape()
    if tape is not None and any(tape.is_tracked(t) for t in inputs):
        tape.record(out, inputs, backward, op)
    return out


def _same_shape(a: Tensor, b: Tensor, op: str):
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# -- linear algebra ---------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    A, B = a.data, b.data

    def backward(g):
        return g @ B.T, A.T @ g

    return _emit(A @ B, (a, b), backward, "matmul")


def spmm(s: SparseMatrix, d: Tensor) -> Tensor:
    """Sparse-constant times dense product; only ``d`` receives a gradient."""
    if d.ndim != 2 or s.cols != d.shape[0]:
        raise ShapeError(f"spmm: cannot multiply {s.shape} by {d.shape}")
    out = np.asarray(s.to_scipy() @ d.data)

    def backward(g):
        return (np.asarray(s.to_scipy_t() @ g),)

    return _emit(out, (d,), backward, "spmm")


def transpose(x: Tensor) -> Tensor:
    return _emit(x.data.T.copy(), (x,), lambda g: (g.T,), "transpose")


def gather_rows(x: Tensor, index) -> Tensor:
    """Embedding lookup: rows ``index`` of ``x`` (repeats allowed)."""
    index = np.asarray(index, dtype=np.int64)
    n = x.shape[0]

    def backward(g):
        gx = np.zeros((n,) + g.shape[1:], dtype=DTYPE)
        np.add.at(gx, index, g)
        return (gx,)

    return _emit(x.data[index], (x,), backward, "gather_rows")


# -- elementwise ------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "add")
    return _emit(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "sub")
    return _emit(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "mul")
    A, B = a.data, b.data
    return _emit(A * B, (a, b), lambda g: (g * B, g * A), "mul")


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """``x`` (m, n) plus a row vector ``b`` (n,) broadcast over rows."""
    if x.ndim != 2 or b.shape != (x.shape[1],):
        raise ShapeError(f"add_bias: bias {b.shape} does not fit {x.shape}")
    return _emit(x.data + b.data, (x, b), lambda g: (g, g.sum(axis=0)), "add_bias")


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    return _emit(x.data * c, (x,), lambda g: (g * c,), "scale")


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    # np.maximum keeps NaN, so divergence is not silently masked
    return _emit(np.maximum(x.data, 0.0), (x,), lambda g: (g * mask,), "relu")


def leaky_relu(x: Tensor, alpha: float = 0.2) -> Tensor:
    slope = np.where(x.data > 0, 1.0, alpha)
    return _emit(x.data * slope, (x,), lambda g: (g * slope,), "leaky_relu")


def sigmoid(x: Tensor) -> Tensor:
    s = expit(x.data)
    return _emit(s, (x,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def exp(x: Tensor) -> Tensor:
    e = np.exp(x.data)
    return _emit(e, (x,), lambda g: (g * e,), "exp")


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0):
        raise NonFiniteError("log of non-positive input")
    X = x.data
    return _emit(np.log(X), (x,), lambda g: (g / X,), "log")


def square(x: Tensor) -> Tensor:
    X = x.data
    return _emit(X * X, (x,), lambda g: (2.0 * g * X,), "square")


_UNARY = {
    "relu": relu,
    "leaky_relu": leaky_relu,
    "sigmoid": sigmoid,
    "exp": exp,
    "log": log,
    "square": square,
}
_BINARY = {"add": add, "sub": sub, "mul": mul}


def elementwise(op: str, *args, **kwargs) -> Tensor:
    """Dispatch a pointwise op by name, e.g. ``elementwise("leaky_relu", x, alpha=0.1)``."""
    if op in _UNARY:
        return _UNARY[op](*args, **kwargs)
    if op in _BINARY:
        return _BINARY[op](*args)
    raise ValueError(f"unknown elementwise op {op!r}")


# -- reductions -------------------------------------------------------------

def sum(x: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    shape = x.shape
    return _emit(np.array(x.data.sum()), (x,), lambda g: (np.full(shape, float(g)),), "sum")


def mean(x: Tensor) -> Tensor:
    shape, n = x.shape, x.size
    return _emit(np.array(x.data.mean()), (x,), lambda g: (np.full(shape, float(g) / n),), "mean")


# -- attention over a sparse pattern ---------------------------------------

def _segments(pattern: SparseMatrix):
    counts = pattern.row_counts()
    if np.any(counts == 0):
        empty = int(np.flatnonzero(counts == 0)[0])
        raise ShapeError(f"mask row {empty} has no entries")
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return starts


def _segment_softmax(values, rows, starts):
    shifted = values - np.maximum.reduceat(values, starts)[rows]
    e = np.exp(shifted)
    return e / np.add.reduceat(e, starts)[rows]


def _segment_softmax_backward(alpha, g, rows, starts):
    dot = np.add.reduceat(alpha * g, starts)[rows]
    return alpha * (g - dot)


def softmax_rows_masked(logits: Tensor, mask: SparseMatrix) -> Tensor:
    """Row softmax of a dense square matrix restricted to ``mask``'s pattern.

    Entries outside the mask are exactly zero in the output.
    """
    if logits.shape != mask.shape:
        raise ShapeError(f"softmax_rows_masked: logits {logits.shape} vs mask {mask.shape}")
    starts = _segments(mask)
    r, c = mask.row, mask.col
    alpha = _segment_softmax(logits.data[r, c], r, starts)
    out = np.zeros(logits.shape)
    out[r, c] = alpha

    def backward(g):
        gl = np.zeros(logits.shape)
        gl[r, c] = _segment_softmax_backward(alpha, g[r, c], r, starts)
        return (gl,)

    return _emit(out, (logits,), backward, "softmax_rows_masked")


def edge_scores(src: Tensor, dst: Tensor, pattern: SparseMatrix) -> Tensor:
    """Per-entry score ``src[i] + dst[j]`` for every ``(i, j)`` in the pattern.

    ``src`` and ``dst`` are column vectors of shape (n, 1).
    """
    if src.shape != (pattern.rows, 1) or dst.shape != (pattern.cols, 1):
        raise ShapeError("edge_scores: src/dst must be column vectors matching the pattern")
    r, c = pattern.row, pattern.col
    out = src.data[r, 0] + dst.data[c, 0]

    def backward(g):
        gs = np.bincount(r, weights=g, minlength=pattern.rows).reshape(-1, 1)
        gd = np.bincount(c, weights=g, minlength=pattern.cols).reshape(-1, 1)
        return gs, gd

    return _emit(out, (src, dst), backward, "edge_scores")


def edge_softmax(values: Tensor, pattern: SparseMatrix) -> Tensor:
    """Softmax of per-entry values within each row of the pattern."""
    if values.shape != (pattern.nnz,):
        raise ShapeError("edge_softmax: one value per pattern entry required")
    starts = _segments(pattern)
    r = pattern.row
    alpha = _segment_softmax(values.data, r, starts)
    return _emit(alpha, (values,),
                 lambda g: (_segment_softmax_backward(alpha, g, r, starts),), "edge_softmax")


def edge_spmm(values: Tensor, pattern: SparseMatrix, dense: Tensor) -> Tensor:
    """``M @ dense`` where ``M`` has the pattern's coordinates and learnable ``values``."""
    if values.shape != (pattern.nnz,) or dense.ndim != 2 or dense.shape[0] != pattern.cols:
        raise ShapeError("edge_spmm: operand shapes do not match the pattern")
    r, c = pattern.row, pattern.col
    M = sp.csr_matrix((values.data, (r, c)), shape=pattern.shape)
    D = dense.data

    def backward(g):
        gv = np.einsum("ij,ij->i", g[r], D[c])
        gd = np.asarray(M.T @ g)
        return gv, gd

    return _emit(np.asarray(M @ D), (values, dense), backward, "edge_spmm")


# -- stochastic -------------------------------------------------------------

def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; identity when not training or ``rate == 0``."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return _emit(x.data * keep, (x,), lambda g: (g * keep,), "dropout")


# -- losses -----------------------------------------------------------------

def _softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def bce_with_logits(logits: Tensor, target, pos_weight: float = 1.0) -> Tensor:
    """Mean binary cross-entropy on logits with a weight on positive targets.

    ``-[w * y * log s(l) + (1 - y) * log(1 - s(l))]`` averaged over all entries,
    evaluated in the numerically stable softplus form.
    """
    y = np.asarray(target, dtype=DTYPE)
    if y.shape != logits.shape:
        if y.ndim == 0:
            y = np.full(logits.shape, float(y))
        else:
            raise ShapeError(f"bce_with_logits: target {y.shape} vs logits {logits.shape}")
    L = logits.data
    n = L.size
    w = float(pos_weight)
    loss = (w * (y * _softplus(-L)) + (1.0 - y) * _softplus(L)).mean()

    def backward(g):
        s = expit(L)
        grad = (1.0 - y) * s - w * y * (1.0 - s)
        grad *= float(g) / n
        return (grad,)

    return _emit(np.array(loss), (logits,), backward, "bce_with_logits")


def mse(pred: Tensor, target) -> Tensor:
    t = np.asarray(target, dtype=DTYPE)
    if t.shape != pred.shape:
        raise ShapeError(f"mse: target {t.shape} vs prediction {pred.shape}")
    diff = pred.data - t
    n = diff.size
    return _emit(np.array((diff * diff).mean()), (pred,), lambda g: (2.0 * float(g) * diff / n,), "mse")


def softmax_cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean multi-class cross-entropy of integer ``labels`` under row softmax."""
    labels = np.asarray(labels, dtype=np.int64)
    L = logits.data
    if L.ndim != 2 or labels.shape != (L.shape[0],):
        raise ShapeError("softmax_cross_entropy: expects (m, C) logits and m labels")
    shifted = L - L.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(L.shape[0])
    loss = (logz - shifted[rows, labels]).mean()

    def backward(g):
        p = np.exp(shifted - logz[:, None])
        p[rows, labels] -= 1.0
        return (p * (float(g) / L.shape[0]),)

    return _emit(np.array(loss), (logits,), backward, "softmax_cross_entropy")
