"""Scalar convex-function descriptors and divided differences.

A descriptor carries f, f', f'' as vectorized callables on the strictly
positive axis together with the values (if any) that extend them to zero.
Divided differences switch to the derivative at the midpoint whenever the two
arguments fall inside the same relative cluster, which keeps the Schur
multiplier kernels stable across eigenvalue crossings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DEFAULT_CLUSTER_TOL
from .errors import ContractViolationError, DomainError


@dataclass(frozen=True)
class ScalarFunctionDescriptor:
    label: str
    order_fns: tuple
    zero_values: tuple = (None, None, None)
    convex: bool = False
    p: float = None

    def eval_order(self, x, order):
        """Vectorized f, f' or f'' with explicit handling of the origin."""
        if order not in (0, 1, 2):
            raise ContractViolationError("order must be 0, 1 or 2")
        fn = self.order_fns[order]
        if fn is None:
            raise DomainError(f"{self.label} has no derivative of order {order}")
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0):
            raise DomainError(f"{self.label} evaluated at a negative argument")
        at_zero = x == 0.0
        if not at_zero.any():
            return fn(x)
        zv = self.zero_values[order]
        if zv is None:
            raise DomainError(
                f"{self.label} order {order} is undefined at 0; request an epsilon floor")
        out = np.empty(x.shape, dtype=float)
        out[at_zero] = zv
        if (~at_zero).any():
            out[~at_zero] = fn(x[~at_zero])
        return out

    def __call__(self, x):
        return self.eval_order(x, 0)

    def deriv(self, x):
        return self.eval_order(x, 1)

    def deriv2(self, x):
        return self.eval_order(x, 2)

    def to_spec(self):
        if self.p is None:
            return {"tag": self.label}
        return {"tag": self.label.split("(")[0], "p": float(self.p)}


def xlogx():
    """f(x) = x log x with the 0 log 0 = 0 convention."""
    return ScalarFunctionDescriptor(
        label="xlogx",
        order_fns=(lambda x: x * np.log(x), lambda x: np.log(x) + 1.0, lambda x: 1.0 / x),
        zero_values=(0.0, None, None),
        convex=True,
    )


def power(p):
    """f(x) = x^p for p in (0, 2]; convex exactly when p >= 1."""
    p = float(p)
    if not 0.0 < p <= 2.0:
        raise ContractViolationError("power exponent must lie in (0, 2]")
    if p == 1.0:
        zero1 = 1.0
    elif p > 1.0:
        zero1 = 0.0
    else:
        zero1 = None
    if p == 2.0:
        zero2 = 2.0
    else:
        zero2 = None
    return ScalarFunctionDescriptor(
        label=f"power({p:g})",
        order_fns=(
            lambda x: x ** p,
            lambda x: p * x ** (p - 1.0),
            lambda x: p * (p - 1.0) * x ** (p - 2.0),
        ),
        zero_values=(0.0, zero1, zero2),
        convex=p >= 1.0,
        p=p,
    )


def log_fn():
    """f(x) = log x, used as a kernel building block (not an entropy weight)."""
    return ScalarFunctionDescriptor(
        label="log",
        order_fns=(np.log, lambda x: 1.0 / x, lambda x: -1.0 / (x * x)),
        zero_values=(None, None, None),
        convex=False,
    )


def custom(label, f0, f1=None, f2=None, zero_values=(None, None, None), convex=False):
    return ScalarFunctionDescriptor(label=label, order_fns=(f0, f1, f2),
                                    zero_values=tuple(zero_values), convex=convex)


def function_from_spec(spec):
    tag = spec.get("tag")
    if tag == "xlogx":
        return xlogx()
    if tag == "power":
        return power(spec["p"])
    if tag == "log":
        return log_fn()
    raise ContractViolationError(f"unknown function tag {tag!r}")


def divided_diff_grid(f, order, xs, ys, tol=DEFAULT_CLUSTER_TOL):
    """Matrix of divided differences f^[order] over the grid xs x ys.

    order 1 is (f(x)-f(y))/(x-y), order 2 the same applied to f'; entries with
    |x-y| <= tol*(1+max(|x|,|y|)) use the next derivative at the midpoint.
    """
    if order not in (1, 2):
        raise ContractViolationError("divided differences support orders 1 and 2")
    X = np.asarray(xs, dtype=float)[:, None]
    Y = np.asarray(ys, dtype=float)[None, :]
    denom = X - Y
    near = np.abs(denom) <= tol * (1.0 + np.maximum(np.abs(X), np.abs(Y)))
    mid = 0.5 * (X + Y)
    fallback = f.eval_order(np.broadcast_to(mid, denom.shape).copy(), order)
    fx = f.eval_order(np.broadcast_to(X, denom.shape).copy(), order - 1)
    fy = f.eval_order(np.broadcast_to(Y, denom.shape).copy(), order - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = (fx - fy) / denom
    return np.where(near, fallback, quot)


def divided_diff(f, order, x, y, tol=DEFAULT_CLUSTER_TOL):
    """Scalar divided difference with the midpoint-derivative degenerate branch."""
    return float(divided_diff_grid(f, order, [float(x)], [float(y)], tol)[0, 0])
