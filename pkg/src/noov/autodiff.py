"""Minimal reverse-mode automatic differentiation over numpy arrays.

Define-by-run tape covering exactly the operations the encoder-decoder
needs: broadcast add/mul, matmul, sigmoid/tanh, column slicing and
concatenation, embedding-row gather, row softmax, and a fused
softmax-cross-entropy. Graphs are built per call and discarded;
`backward` walks the tape once and accumulates gradients into leaves.
"""

from __future__ import annotations

import numpy as np


class Var:
    """A node in the computation graph wrapping an ndarray."""

    __slots__ = ("data", "grad", "parents", "vjp")

    def __init__(self, data, parents=(), vjp=None):
        self.data = np.asarray(data)
        self.grad = None
        self.parents = parents
        self.vjp = vjp

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return "Var(shape=%s, dtype=%s)" % (self.data.shape, self.data.dtype)


def leaf(data) -> Var:
    return Var(data)


def _accumulate(node: Var, g: np.ndarray) -> None:
    if node.grad is None:
        node.grad = np.zeros_like(node.data)
    node.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum g down to `shape`, inverting numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] > 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a: Var, b: Var) -> Var:
    out = Var(a.data + b.data, (a, b))

    def vjp(g):
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(g, b.data.shape))

    out.vjp = vjp
    return out


def mul(a: Var, b: Var) -> Var:
    out = Var(a.data * b.data, (a, b))

    def vjp(g):
        _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    out.vjp = vjp
    return out


def scale(a: Var, c: float) -> Var:
    out = Var(a.data * a.data.dtype.type(c), (a,))

    def vjp(g):
        _accumulate(a, g * a.data.dtype.type(c))

    out.vjp = vjp
    return out


def matmul(a: Var, b: Var) -> Var:
    out = Var(a.data @ b.data, (a, b))

    def vjp(g):
        _accumulate(a, g @ b.data.T)
        _accumulate(b, a.data.T @ g)

    out.vjp = vjp
    return out


def sigmoid(a: Var) -> Var:
    with np.errstate(over="ignore"):
        s = 1.0 / (1.0 + np.exp(-a.data))
    out = Var(s.astype(a.data.dtype, copy=False), (a,))

    def vjp(g):
        _accumulate(a, g * (s * (1.0 - s)))

    out.vjp = vjp
    return out


def tanh(a: Var) -> Var:
    t = np.tanh(a.data)
    out = Var(t, (a,))

    def vjp(g):
        _accumulate(a, g * (1.0 - t * t))

    out.vjp = vjp
    return out


def concat_cols(parts: list[Var]) -> Var:
    out = Var(np.concatenate([p.data for p in parts], axis=1), tuple(parts))
    widths = [p.data.shape[1] for p in parts]

    def vjp(g):
        start = 0
        for p, w in zip(parts, widths):
            _accumulate(p, g[:, start : start + w])
            start += w

    out.vjp = vjp
    return out


def cols(a: Var, start: int, stop: int) -> Var:
    out = Var(a.data[:, start:stop], (a,))

    def vjp(g):
        full = np.zeros_like(a.data)
        full[:, start:stop] = g
        _accumulate(a, full)

    out.vjp = vjp
    return out


def rows(table: Var, ids: np.ndarray) -> Var:
    """Embedding gather: out[i] = table[ids[i]]."""
    ids = np.asarray(ids, dtype=np.int64)
    out = Var(table.data[ids], (table,))

    def vjp(g):
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, ids, g)

    out.vjp = vjp
    return out


def total(a: Var) -> Var:
    """Sum of all entries, as a scalar Var."""
    out = Var(np.asarray(a.data.sum(), dtype=a.data.dtype), (a,))

    def vjp(g):
        _accumulate(a, np.full_like(a.data, float(g)))

    out.vjp = vjp
    return out


def softmax_rows(a: Var) -> Var:
    """Row-wise softmax with max-subtraction for stability."""
    z = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=1, keepdims=True)
    out = Var(s, (a,))

    def vjp(g):
        dot = (g * s).sum(axis=1, keepdims=True)
        _accumulate(a, s * (g - dot))

    out.vjp = vjp
    return out


def cross_entropy_rows(logits: Var, targets: np.ndarray, weights: np.ndarray) -> Var:
    """Weighted sum of per-row negative log-likelihoods (a scalar Var).

    targets are class ids per row; weights usually mask padding (0/1).
    """
    targets = np.asarray(targets, dtype=np.int64)
    weights = np.asarray(weights, dtype=logits.data.dtype)
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - lse
    n = logits.data.shape[0]
    nll = -logp[np.arange(n), targets]
    out = Var(np.asarray((nll * weights).sum(), dtype=logits.data.dtype), (logits,))
    probs = np.exp(logp)

    def vjp(g):
        grad = probs.copy()
        grad[np.arange(n), targets] -= 1.0
        grad *= (weights * float(g))[:, None]
        _accumulate(logits, grad.astype(logits.data.dtype, copy=False))

    out.vjp = vjp
    return out


def backward(loss: Var) -> None:
    """Accumulate d(loss)/d(node) into .grad over the whole graph."""
    order: list[Var] = []
    seen: set[int] = set()
    stack: list[tuple[Var, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node.vjp is not None and node.grad is not None:
            node.vjp(node.grad)
