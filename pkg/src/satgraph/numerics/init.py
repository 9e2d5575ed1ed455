"""Parameter initializers."""

import numpy as np

from .tensor import Tensor


def glorot_init(shape, rng: np.random.Generator, name=None) -> Tensor:
    """Glorot/Xavier uniform: U(-b, b) with ``b = sqrt(6 / (fan_in + fan_out))``."""
    if len(shape) != 2:
        raise ValueError(f"glorot_init expects a 2-D shape, got {shape}")
    fan_in, fan_out = shape
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True, name=name)


def zeros(shape, name=None) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True, name=name)
