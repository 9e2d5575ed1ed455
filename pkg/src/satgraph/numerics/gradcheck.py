"""Finite-difference verification of tape gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NonFiniteError
from .tensor import Tape, Tensor


def numeric_gradient(f: Callable[[Tensor], Tensor], point: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central differences of scalar ``f`` at ``point``, one coordinate at a time."""
    x = np.array(point, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = _value(f, x)
        flat[i] = orig - h
        fm = _value(f, x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad


def _value(f, x) -> float:
    out = f(Tensor(x.copy()))
    v = float(np.asarray(out.data).reshape(-1)[0])
    if not np.isfinite(v):
        raise NonFiniteError("function value is not finite near the check point")
    return v


def autodiff_gradient(f: Callable[[Tensor], Tensor], point: np.ndarray) -> np.ndarray:
    x = Tensor(np.array(point, dtype=np.float64), requires_grad=True)
    with Tape() as tape:
        out = f(x)
    if out.size != 1:
        raise ValueError("grad_check needs a scalar-valued function")
    if not np.isfinite(out.data).all():
        raise NonFiniteError("function value is not finite at the check point")
    (g,) = tape.gradient(out, [x])
    return g


def grad_check(f: Callable[[Tensor], Tensor], point, h: float = 1e-5) -> float:
    """Max over coordinates of ``|autodiff - central| / max(1, |central|)``."""
    point = np.asarray(point, dtype=np.float64)
    ad = autodiff_gradient(f, point)
    fd = numeric_gradient(f, point, h)
    return float(np.max(np.abs(ad - fd) / np.maximum(1.0, np.abs(fd)))) if fd.size else 0.0
