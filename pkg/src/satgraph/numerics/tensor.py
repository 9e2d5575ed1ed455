"""Dense tensors and the gradient tape.

A :class:`Tensor` is a thin wrapper around a float64 ``numpy`` array. Operations
in :mod:`satgraph.numerics.ops` record themselves on the innermost active
:class:`Tape` whenever one of their inputs is tracked by that tape. Calling
:meth:`Tape.gradient` replays the records in reverse execution order and sums
the partials of every input, so a value used ``k`` times receives ``k``
contributions.

Usage::

    w = Tensor(np.ones((3, 2)), requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(ops.square(w))
    (gw,) = tape.gradient(loss, [w])
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import NonFiniteError

DTYPE = np.float64

_local = threading.local()


class Tensor:
    """A dense float64 array, optionally a trainable parameter."""

    __slots__ = ("data", "requires_grad", "name", "__weakref__")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        arr = np.asarray(data, dtype=DTYPE)
        if not arr.flags.c_contiguous:
            arr = np.ascontiguousarray(arr)
        self.data = arr
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # operator sugar; the ops module is imported lazily to avoid a cycle
    def __add__(self, other):
        from . import ops
        return ops.add(self, _lift(other, self))

    def __radd__(self, other):
        from . import ops
        return ops.add(_lift(other, self), self)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, _lift(other, self))

    def __rsub__(self, other):
        from . import ops
        return ops.sub(_lift(other, self), self)

    def __mul__(self, other):
        from . import ops
        if np.isscalar(other):
            return ops.scale(self, float(other))
        return ops.mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        from . import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    @property
    def T(self):
        from . import ops
        return ops.transpose(self)


def _lift(value, like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.full(like.shape, value, dtype=DTYPE))


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def assert_finite(t, what: str = "tensor") -> None:
    arr = t.data if isinstance(t, Tensor) else np.asarray(t)
    if not np.all(np.isfinite(arr)):
        bad = int(np.size(arr) - np.count_nonzero(np.isfinite(arr)))
        raise NonFiniteError(f"{what} contains {bad} non-finite value(s)")


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class _Record:
    output: Tensor
    inputs: tuple
    backward: BackwardFn
    op: str


class Tape:
    """Ordered record of differentiable operations executed inside ``with``.

    A tape is confined to the thread that opened it. Tapes nest; only the
    innermost one records.
    """

    def __init__(self):
        self.records: list[_Record] = []
        self._tracked: set[int] = set()
        self._keep: list[Tensor] = []

    def __enter__(self):
        _stack().append(self)
        return self

    def __exit__(self, *exc):
        stack = _stack()
        if not stack or stack[-1] is not self:
            raise RuntimeError("tape stack corrupted")
        stack.pop()
        return False

    def watch(self, *tensors: Tensor) -> None:
        for t in tensors:
            self._tracked.add(id(t))
            self._keep.append(t)

    def is_tracked(self, t: Tensor) -> bool:
        return t.requires_grad or id(t) in self._tracked

    def record(self, output: Tensor, inputs: Sequence[Tensor], backward: BackwardFn, op: str = "") -> None:
        self.records.append(_Record(output, tuple(inputs), backward, op))
        self._tracked.add(id(output))

    def gradient(self, target: Tensor, sources: Sequence[Tensor], seed: Optional[np.ndarray] = None) -> list:
        """Reverse-mode gradients of ``target`` w.r.t. each of ``sources``.

        ``target`` is normally a scalar; for non-scalar targets pass ``seed``
        (the upstream gradient). Sources the target does not depend on get
        zeros.
        """
        if seed is None:
            if target.size != 1:
                raise ValueError("gradient of a non-scalar target needs an explicit seed")
            seed = np.ones_like(target.data)
        grads: dict[int, np.ndarray] = {id(target): np.asarray(seed, dtype=DTYPE)}
        keep = {id(s) for s in sources}
        for rec in reversed(self.records):
            key = id(rec.output)
            # intermediate grads are dropped once consumed to bound memory
            g_out = grads.get(key) if key in keep else grads.pop(key, None)
            if g_out is None:
                continue
            partials = rec.backward(g_out)
            for inp, g in zip(rec.inputs, partials):
                if g is None or not self.is_tracked(inp):
                    continue
                key = id(inp)
                prev = grads.get(key)
                grads[key] = g if prev is None else prev + g
        out = []
        for s in sources:
            g = grads.get(id(s))
            out.append(np.zeros_like(s.data) if g is None else g)
        return out


def _stack() -> list:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = _local.stack = []
    return stack


def current_tape() -> Optional[Tape]:
    stack = _stack()
    return stack[-1] if stack else None
