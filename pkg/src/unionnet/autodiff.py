"""Minimal reverse-mode differentiation over the fixed op set the model needs.

The graph is built by the op functions below (dense/sparse matmul, relu,
dropout, row softmax, log, entry gather, row-subset mean, constant power,
weighted sum, scalar affine combination). Anything else is out of scope on
purpose: losses in this package are composed from exactly these pieces and
checked against central finite differences.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp


class Tensor:
    """Node in the computation graph.

    ``value`` is a float64 ndarray (or a python float for scalars).
    ``needs_grad`` marks nodes on a path from a parameter leaf; backward
    skips everything else.
    """

    __slots__ = ("value", "grad", "needs_grad", "parents", "_backward")

    def __init__(self, value, needs_grad: bool = False,
                 parents: tuple = (), backward: Callable | None = None):
        self.value = value
        self.grad = None
        self.needs_grad = needs_grad
        self.parents = parents
        self._backward = backward

    @property
    def shape(self):
        return np.shape(self.value)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, needs_grad={self.needs_grad})"


def parameter(value) -> Tensor:
    """Leaf tensor that accumulates a gradient."""
    return Tensor(np.asarray(value, dtype=np.float64), needs_grad=True)


def constant(value) -> Tensor:
    """Leaf tensor treated as a constant (no gradient)."""
    return Tensor(np.asarray(value, dtype=np.float64))


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else constant(x)


def _accumulate(t: Tensor, g):
    if t.grad is None:
        t.grad = g
    else:
        t.grad = t.grad + g


def _node(value, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    needs = any(p.needs_grad for p in parents)
    return Tensor(value, needs_grad=needs, parents=tuple(parents),
                  backward=backward if needs else None)


# ---------------------------------------------------------------------------
# op set
# ---------------------------------------------------------------------------

def matmul(a, b) -> Tensor:
    """Dense matrix product a @ b."""
    a, b = _wrap(a), _wrap(b)
    out_value = a.value @ b.value

    def backward(g):
        if a.needs_grad:
            _accumulate(a, g @ b.value.T)
        if b.needs_grad:
            _accumulate(b, a.value.T @ g)

    return _node(out_value, (a, b), backward)


def spmm(adj: sp.spmatrix, x) -> Tensor:
    """Sparse-dense product adj @ x; adj is a constant CSR matrix."""
    x = _wrap(x)
    out_value = adj @ x.value

    def backward(g):
        _accumulate(x, adj.T @ g)

    return _node(out_value, (x,), backward)


def relu(x) -> Tensor:
    x = _wrap(x)
    mask = x.value > 0
    out_value = np.where(mask, x.value, 0.0)

    def backward(g):
        _accumulate(x, g * mask)

    return _node(out_value, (x,), backward)


def hadamard(x, factor: np.ndarray) -> Tensor:
    """Elementwise product with a constant array (dropout's working half)."""
    x = _wrap(x)
    out_value = x.value * factor

    def backward(g):
        _accumulate(x, g * factor)

    return _node(out_value, (x,), backward)


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout keep mask: 0 with prob rate, else 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    return (rng.random(shape) >= rate) * (1.0 / (1.0 - rate))


def dropout(x, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: keep with prob 1-rate, scale kept entries by 1/(1-rate).

    rate == 0 is the identity and draws nothing from ``rng``.
    """
    x = _wrap(x)
    if rate == 0.0:
        return x
    return hadamard(x, dropout_mask(np.shape(x.value), rate, rng))


def row_softmax(x) -> Tensor:
    """Row-wise softmax, shifted by the row max for stability."""
    x = _wrap(x)
    z = x.value - x.value.max(axis=1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        inner = (g * p).sum(axis=1, keepdims=True)
        _accumulate(x, p * (g - inner))

    return _node(p, (x,), backward)


def log(x) -> Tensor:
    x = _wrap(x)
    out_value = np.log(x.value)

    def backward(g):
        _accumulate(x, g / x.value)

    return _node(out_value, (x,), backward)


def pick(x, rows, cols) -> Tensor:
    """Gather entries x[rows[i], cols[i]] into a vector."""
    x = _wrap(x)
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    out_value = x.value[rows, cols]

    def backward(g):
        dx = np.zeros_like(x.value)
        np.add.at(dx, (rows, cols), g)
        _accumulate(x, dx)

    return _node(out_value, (x,), backward)


def row_mean(x, rows) -> Tensor:
    """Mean of the selected rows of x (a length-ncols vector)."""
    x = _wrap(x)
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise ValueError("row_mean over an empty row subset")
    out_value = x.value[rows].mean(axis=0)

    def backward(g):
        dx = np.zeros_like(x.value)
        dx[rows] = g / rows.size
        _accumulate(x, dx)

    return _node(out_value, (x,), backward)


def powc(x, exponent: float) -> Tensor:
    """Elementwise x ** exponent for a constant exponent."""
    x = _wrap(x)
    out_value = x.value ** exponent

    def backward(g):
        _accumulate(x, g * exponent * x.value ** (exponent - 1.0))

    return _node(out_value, (x,), backward)


def weighted_sum(x, weights) -> Tensor:
    """Scalar sum_i weights[i] * x[i] with constant weights."""
    x = _wrap(x)
    weights = np.asarray(weights, dtype=np.float64)
    out_value = float(np.dot(weights, x.value))

    def backward(g):
        _accumulate(x, g * weights)

    return _node(out_value, (x,), backward)


def affine(terms: Sequence[Tensor], coeffs: Sequence[float],
           const: float = 0.0) -> Tensor:
    """Scalar const + sum_k coeffs[k] * terms[k]."""
    terms = [_wrap(t) for t in terms]
    coeffs = [float(c) for c in coeffs]
    if len(terms) != len(coeffs):
        raise ValueError("terms and coeffs must have equal length")
    out_value = const + sum(c * float(t.value) for t, c in zip(terms, coeffs))

    def backward(g):
        for t, c in zip(terms, coeffs):
            if t.needs_grad:
                _accumulate(t, g * c)

    return _node(out_value, terms, backward)


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------

def backward(out: Tensor):
    """Backpropagate from a scalar loss; accumulates into each leaf's .grad."""
    if np.shape(out.value) != ():
        raise ValueError("backward expects a scalar loss tensor")
    if not out.needs_grad:
        return

    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(out, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.needs_grad and id(p) not in seen:
                stack.append((p, False))

    out.grad = 1.0
    for node in reversed(order):
        if node._backward is not None:
            node._backward(node.grad)
