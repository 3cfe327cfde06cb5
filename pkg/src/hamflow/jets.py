"""Batched second-order forward-mode differentiation.

A :class:`Jet` carries the value, gradient, and Hessian of a scalar quantity
with respect to the coordinates of a chart, for a whole batch of evaluation
points at once (``value`` has shape ``(n,)``, ``grad`` shape ``(n, d)``,
``hess`` shape ``(n, d, d)``).  Arithmetic propagates derivatives by the chain
rule, so any expression composed from the operations below carries exact first
and second derivatives up to roundoff, with no symbolic machinery and no step
size to tune.

Taking a coordinate partial of a jet (:meth:`Jet.partial`) produces a jet one
order lower: the result's gradient comes from the parent's Hessian, and its
own Hessian is unknown.  Missing orders are stored as ``None`` and raise
:class:`~hamflow.errors.JetOrderError` when consumed, rather than silently
reading zeros.  Plain numbers and numpy arrays entering jet arithmetic are
treated as constants (zero derivatives of every order).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import JetOrderError

Array = np.ndarray

_SCALARS = (int, float, np.floating, np.integer)


class Jet:
    """Value plus first/second derivatives of a batch of scalars."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: Array, grad: Array | None, hess: Array | None):
        self.value = value
        self.grad = grad
        self.hess = hess

    # ------------------------------------------------------------------
    # introspection

    @property
    def order(self) -> int:
        if self.grad is None:
            return 0
        if self.hess is None:
            return 1
        return 2

    @property
    def n(self) -> int:
        return self.value.shape[0]

    @property
    def dim(self) -> int:
        if self.grad is None:
            raise JetOrderError("order-0 jet has no coordinate dimension attached")
        return self.grad.shape[1]

    def require(self, order: int) -> None:
        if self.order < order:
            raise JetOrderError(f"jet carries order {self.order}, order {order} required")

    def partial(self, j: int) -> "Jet":
        """Coordinate partial d/dx_j, one derivative order lower."""
        self.require(1)
        g = None if self.hess is None else self.hess[:, j, :].copy()
        return Jet(self.grad[:, j].copy(), g, None)

    # ------------------------------------------------------------------
    # arithmetic

    def _coerce(self, other) -> "Jet | None":
        """Constants become jets of matching order with zero derivatives."""
        if isinstance(other, Jet):
            return other
        if isinstance(other, _SCALARS) or isinstance(other, np.ndarray):
            v = np.broadcast_to(np.asarray(other, dtype=float), self.value.shape).copy()
            g = None if self.grad is None else np.zeros_like(self.grad)
            h = None if self.hess is None else np.zeros_like(self.hess)
            return Jet(v, g, h)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        g = None if (self.grad is None or o.grad is None) else self.grad + o.grad
        h = None if (self.hess is None or o.hess is None) else self.hess + o.hess
        return Jet(self.value + o.value, g, h)

    __radd__ = __add__

    def __neg__(self):
        g = None if self.grad is None else -self.grad
        h = None if self.hess is None else -self.hess
        return Jet(-self.value, g, h)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        g = None if (self.grad is None or o.grad is None) else self.grad - o.grad
        h = None if (self.hess is None or o.hess is None) else self.hess - o.hess
        return Jet(self.value - o.value, g, h)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self, o
        val = a.value * b.value
        grad = None
        hess = None
        if a.grad is not None and b.grad is not None:
            grad = a.grad * b.value[:, None] + b.grad * a.value[:, None]
            if a.hess is not None and b.hess is not None:
                cross = a.grad[:, :, None] * b.grad[:, None, :]
                hess = (
                    a.hess * b.value[:, None, None]
                    + b.hess * a.value[:, None, None]
                    + cross
                    + np.swapaxes(cross, 1, 2)
                )
        return Jet(val, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def _reciprocal(self) -> "Jet":
        return _lift(self, 1.0 / self.value, -1.0 / self.value**2, 2.0 / self.value**3)

    def __pow__(self, p):
        if not isinstance(p, _SCALARS):
            return NotImplemented
        p = float(p)
        v = self.value
        return _lift(self, v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def sq(self) -> "Jet":
        """Square, cheaper and safer than the generic power chain rule."""
        return self * self


def _lift(x: Jet, f: Array, fp: Array, fpp: Array) -> Jet:
    """Apply a scalar function with known derivatives to a jet."""
    grad = None
    hess = None
    if x.grad is not None:
        grad = fp[:, None] * x.grad
        if x.hess is not None:
            outer = x.grad[:, :, None] * x.grad[:, None, :]
            hess = fp[:, None, None] * x.hess + fpp[:, None, None] * outer
    return Jet(f, grad, hess)


# ----------------------------------------------------------------------
# elementary functions


def sqrt(x: Jet) -> Jet:
    r = np.sqrt(x.value)
    return _lift(x, r, 0.5 / r, -0.25 / (r * x.value))


def exp(x: Jet) -> Jet:
    e = np.exp(x.value)
    return _lift(x, e, e, e)


def log(x: Jet) -> Jet:
    return _lift(x, np.log(x.value), 1.0 / x.value, -1.0 / x.value**2)


def sin(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    return _lift(x, s, c, -s)


def cos(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    return _lift(x, c, -s, -c)


def atan2(y: Jet, x: Jet) -> Jet:
    """Two-argument arctangent of a pair of jets."""
    xv, yv = x.value, y.value
    r2 = xv**2 + yv**2
    val = np.arctan2(yv, xv)
    fx = -yv / r2
    fy = xv / r2
    grad = None
    hess = None
    if x.grad is not None and y.grad is not None:
        grad = fx[:, None] * x.grad + fy[:, None] * y.grad
        if x.hess is not None and y.hess is not None:
            r4 = r2**2
            fxx = 2 * xv * yv / r4
            fxy = (yv**2 - xv**2) / r4
            fyy = -2 * xv * yv / r4
            gx, gy = x.grad, y.grad
            oxx = gx[:, :, None] * gx[:, None, :]
            oyy = gy[:, :, None] * gy[:, None, :]
            oxy = gx[:, :, None] * gy[:, None, :]
            hess = (
                fx[:, None, None] * x.hess
                + fy[:, None, None] * y.hess
                + fxx[:, None, None] * oxx
                + fxy[:, None, None] * (oxy + np.swapaxes(oxy, 1, 2))
                + fyy[:, None, None] * oyy
            )
    return Jet(val, grad, hess)


# ----------------------------------------------------------------------
# constructors


def seed(points: Array, order: int = 2) -> list[Jet]:
    """Seed coordinate jets at a batch of points.

    ``points`` has shape ``(n, d)``.  Returns one jet per coordinate, each of
    the requested order, with unit gradients and zero Hessians.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    out = []
    for j in range(d):
        grad = None
        hess = None
        if order >= 1:
            grad = np.zeros((n, d))
            grad[:, j] = 1.0
        if order >= 2:
            hess = np.zeros((n, d, d))
        out.append(Jet(pts[:, j].copy(), grad, hess))
    return out


def constant(value, like: Jet) -> Jet:
    """Constant jet broadcast to the batch of ``like`` (keeps full order)."""
    v = np.broadcast_to(np.asarray(value, dtype=float), like.value.shape).copy()
    grad = None if like.grad is None else np.zeros_like(like.grad)
    hess = None if like.hess is None else np.zeros_like(like.hess)
    return Jet(v, grad, hess)


def evaluate(fn: Callable[[Sequence[Jet]], Jet], points: Array, order: int = 2) -> Jet:
    """Evaluate a jet-valued function of coordinates at raw points."""
    return fn(seed(points, order=order))
