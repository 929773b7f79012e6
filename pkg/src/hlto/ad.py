"""Vectorized forward-mode automatic differentiation on dual numbers.

A :class:`Dual` carries a value array together with a batch of tangent
components stacked along a leading axis, so a single sweep through the model
propagates many directional derivatives at once.  All math used by the
dynamics, constraints, and objective is written against the small dispatch
layer below (``sin``, ``cos``, ``stack``, plain arithmetic), which means the
same code path runs on plain ndarrays and on Duals.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class NonSmoothPoint(ValueError):
    """A primitive was evaluated where its derivative does not exist."""


def _btan(d: "Dual", out_shape: tuple) -> np.ndarray:
    """Tangents of ``d`` broadcast to a result of shape ``out_shape``.

    The tangent stack carries the seed axis first, so plain numpy trailing
    alignment misfires whenever the two operands have different value ranks;
    padding singleton axes after the seed axis restores it.  Returns the
    stored array untouched in the common already-matching case.
    """
    if d.val.shape == out_shape:
        return d.tan
    m = d.tan.shape[0]
    pad = len(out_shape) - d.val.ndim
    t = d.tan.reshape((m,) + (1,) * pad + d.val.shape)
    return np.broadcast_to(t, (m,) + tuple(out_shape))


def _as_tuple_index(idx):
    if isinstance(idx, tuple):
        return idx
    return (idx,)


class Dual:
    """Value array plus stacked tangents.

    ``val`` has an arbitrary shape S; ``tan`` has shape ``(m,) + S`` where m is
    the number of simultaneously propagated derivative directions.  Binary ops
    rely on numpy broadcasting aligning trailing axes, so the leading tangent
    axis never needs explicit bookkeeping.
    """

    __slots__ = ("val", "tan")

    def __init__(self, val, tan):
        self.val = np.asarray(val, dtype=float)
        self.tan = np.asarray(tan, dtype=float)

    @property
    def shape(self):
        return self.val.shape

    @property
    def nseeds(self) -> int:
        return self.tan.shape[0]

    def __repr__(self):
        return f"Dual(shape={self.val.shape}, nseeds={self.tan.shape[0]})"

    # ---- structural ops -------------------------------------------------

    def __getitem__(self, idx):
        tidx = (slice(None),) + _as_tuple_index(idx)
        return Dual(self.val[idx], self.tan[tidx])

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Dual(
            self.val.reshape(shape),
            self.tan.reshape((self.tan.shape[0],) + tuple(shape)),
        )

    def ravel(self):
        return self.reshape(-1)

    def sum(self, axis=None):
        if axis is None:
            return Dual(self.val.sum(), self.tan.reshape(self.tan.shape[0], -1).sum(axis=1))
        if axis >= 0:
            taxis = axis + 1
        else:
            taxis = axis
        return Dual(self.val.sum(axis=axis), self.tan.sum(axis=taxis))

    # ---- arithmetic ------------------------------------------------------

    def __neg__(self):
        return Dual(-self.val, -self.tan)

    def __add__(self, other):
        if isinstance(other, Dual):
            v = self.val + other.val
            return Dual(v, _btan(self, v.shape) + _btan(other, v.shape))
        v = self.val + np.asarray(other, dtype=float)
        return Dual(v, _btan(self, v.shape))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            v = self.val - other.val
            return Dual(v, _btan(self, v.shape) - _btan(other, v.shape))
        v = self.val - np.asarray(other, dtype=float)
        return Dual(v, _btan(self, v.shape))

    def __rsub__(self, other):
        v = np.asarray(other, dtype=float) - self.val
        return Dual(v, -_btan(self, v.shape))

    def __mul__(self, other):
        if isinstance(other, Dual):
            v = self.val * other.val
            return Dual(v, _btan(self, v.shape) * other.val
                        + _btan(other, v.shape) * self.val)
        v = self.val * np.asarray(other, dtype=float)
        return Dual(v, _btan(self, v.shape) * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            v = self.val * inv
            return Dual(v, (_btan(self, v.shape) - v * _btan(other, v.shape)) * inv)
        v = self.val / np.asarray(other, dtype=float)
        return Dual(v, _btan(self, v.shape) / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        v = np.asarray(other, dtype=float) * inv
        return Dual(v, -v * inv * _btan(self, v.shape))

    def __pow__(self, n):
        if not isinstance(n, (int, float)):
            return NotImplemented
        return Dual(self.val ** n, n * self.val ** (n - 1) * self.tan)


def value(x):
    """Strip tangents: the plain value of a Dual, or the input unchanged."""
    return x.val if isinstance(x, Dual) else np.asarray(x, dtype=float)


def seed(x, seeds) -> Dual:
    return Dual(x, seeds)


# ---- primitives ----------------------------------------------------------


def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.val), np.cos(x.val) * x.tan)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.val), -np.sin(x.val) * x.tan)
    return np.cos(x)


def sqrt(x):
    v = value(x)
    if np.any(v <= 0.0) and isinstance(x, Dual):
        raise NonSmoothPoint("sqrt differentiated at a non-positive argument")
    if isinstance(x, Dual):
        r = np.sqrt(x.val)
        return Dual(r, 0.5 / r * x.tan)
    return np.sqrt(x)


def absolute(x):
    v = value(x)
    if isinstance(x, Dual):
        if np.any(v == 0.0):
            raise NonSmoothPoint("abs differentiated at zero")
        return Dual(np.abs(x.val), np.sign(x.val) * x.tan)
    return np.abs(x)


# ---- structural helpers ---------------------------------------------------


def _target_shape(parts):
    return np.broadcast_shapes(*[value(p).shape for p in parts])


def stack(parts: Sequence, axis: int = -1):
    """np.stack that accepts a mix of Duals, arrays, and scalars, broadcasting."""
    duals = [p for p in parts if isinstance(p, Dual)]
    if not duals:
        shape = _target_shape(parts)
        return np.stack(
            [np.broadcast_to(np.asarray(p, dtype=float), shape) for p in parts], axis=axis
        )
    m = duals[0].nseeds
    shape = _target_shape(parts)
    vals, tans = [], []
    for p in parts:
        if isinstance(p, Dual):
            vals.append(np.broadcast_to(p.val, shape))
            tans.append(np.broadcast_to(p.tan, (m,) + shape))
        else:
            arr = np.broadcast_to(np.asarray(p, dtype=float), shape)
            vals.append(arr)
            tans.append(np.zeros((m,) + shape))
    taxis = axis if axis < 0 else axis + 1
    return Dual(np.stack(vals, axis=axis), np.stack(tans, axis=taxis))


def concatenate(parts: Sequence, axis: int = 0):
    duals = [p for p in parts if isinstance(p, Dual)]
    if not duals:
        return np.concatenate([np.asarray(p, dtype=float) for p in parts], axis=axis)
    m = duals[0].nseeds
    vals, tans = [], []
    for p in parts:
        if isinstance(p, Dual):
            vals.append(p.val)
            tans.append(p.tan)
        else:
            arr = np.asarray(p, dtype=float)
            vals.append(arr)
            tans.append(np.zeros((m,) + arr.shape))
    taxis = axis if axis < 0 else axis + 1
    return Dual(np.concatenate(vals, axis=axis), np.concatenate(tans, axis=taxis))


# ---- driver ---------------------------------------------------------------


def _eval_with_seeds(fn: Callable, x: np.ndarray, seeds: np.ndarray):
    out = fn(Dual(x, seeds))
    if isinstance(out, Dual):
        return out.val, out.tan
    out = np.asarray(out, dtype=float)
    return out, np.zeros((seeds.shape[0],) + out.shape)


def jacobian(fn: Callable, x, chunk: int = 64):
    """Value and dense Jacobian of ``fn`` at ``x`` by batched forward sweeps.

    ``fn`` must be written against this module's primitives.  Returns
    ``(value, jac)`` with ``jac.shape == value.shape + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    flat = x.reshape(-1)
    val = None
    cols = []
    for start in range(0, max(n, 1), chunk):
        width = min(chunk, n - start) if n else 0
        seeds_flat = np.zeros((max(width, 1), n))
        if width:
            seeds_flat[np.arange(width), start + np.arange(width)] = 1.0
        v, t = _eval_with_seeds(lambda z: fn(z.reshape(x.shape)), flat, seeds_flat)
        if val is None:
            val = v
        cols.append(t[:width].reshape(width, -1))
        if n == 0:
            break
    jac_flat = np.concatenate(cols, axis=0).T if cols else np.zeros((val.size, 0))
    return val, jac_flat.reshape(val.shape + x.shape)


def gradient(fn: Callable, x, chunk: int = 64):
    """Value and gradient of a scalar function. Thin wrapper over jacobian."""
    val, jac = jacobian(fn, x, chunk=chunk)
    if np.asarray(val).shape != ():
        raise ValueError("gradient expects a scalar-valued function")
    return float(val), jac.reshape(np.asarray(x).shape)
