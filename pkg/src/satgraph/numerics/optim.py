"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from .tensor import Tensor


@dataclass
class AdamState:
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params, **kwargs) -> "AdamState":
        return cls(m=[np.zeros_like(p.data) for p in params],
                   v=[np.zeros_like(p.data) for p in params], **kwargs)


def adam_step(params, grads, state: AdamState, lr: float) -> list:
    """Apply one Adam update in place of each ``param.data`` and return ``params``.

    Parameter arrays are replaced, never written into, so arrays handed out
    earlier (checkpoints, snapshots) stay valid.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError("adam_step: params, grads and state must align")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for i, (p, g) in enumerate(zip(params, grads)):
        if g.shape != p.shape:
            raise ShapeError(f"adam_step: grad {g.shape} vs param {p.shape}")
        m = b1 * state.m[i] + (1.0 - b1) * g
        v = b2 * state.v[i] + (1.0 - b2) * (g * g)
        state.m[i], state.v[i] = m, v
        p.data = p.data - lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


class Adam:
    """Stateful wrapper binding a parameter list to an :class:`AdamState`."""

    def __init__(self, params: list[Tensor], lr: float = 0.005, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.state = AdamState.zeros_like(self.params, beta1=beta1, beta2=beta2, eps=eps)

    def step(self, grads) -> None:
        adam_step(self.params, grads, self.state, self.lr)
