"""Dense/sparse tensor arithmetic with reverse-mode differentiation and Adam."""

from . import ops
from .gradcheck import grad_check, numeric_gradient
from .init import glorot_init, zeros
from .ops import (add, add_bias, bce_with_logits, dropout, edge_scores, edge_softmax, edge_spmm,
                  elementwise, exp, gather_rows, leaky_relu, log, matmul, mean, mse, mul, relu, scale,
                  sigmoid, softmax_cross_entropy, softmax_rows_masked, spmm, square, sub, transpose)
from .optim import Adam, AdamState, adam_step
from .sparse import SparseMatrix
from .tensor import Tape, Tensor, as_tensor, assert_finite, current_tape

__all__ = [
    "Adam", "AdamState", "SparseMatrix", "Tape", "Tensor", "adam_step", "add", "add_bias",
    "as_tensor", "assert_finite", "bce_with_logits", "current_tape", "dropout", "edge_scores",
    "edge_softmax", "edge_spmm", "elementwise", "exp", "gather_rows", "glorot_init", "grad_check",
    "leaky_relu", "log", "matmul", "mean", "mse", "mul", "numeric_gradient", "ops", "relu", "scale",
    "sigmoid", "softmax_cross_entropy", "softmax_rows_masked", "spmm", "square", "sub", "transpose",
    "zeros",
]
