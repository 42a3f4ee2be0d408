"""Neural building blocks: LSTM cells, stacked biLSTM encoding, additive
attention, Adam, gradient clipping, dropout, and finite-difference
gradient checking.

Everything is deterministic given a seed. Compute defaults to float32;
gradient checking requires float64 parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Var

INIT_SCALE = 0.1
FORGET_BIAS = 1.0


class ShapeError(ValueError):
    """Raised when operand dimensions disagree."""


def softmax(x: np.ndarray) -> np.ndarray:
    """Stable softmax over the last axis of a plain array."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ShapeError("softmax of an empty vector is undefined")
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def lstm_cell(x: Var, h: Var, c: Var, wx: Var, wh: Var, b: Var) -> tuple[Var, Var]:
    """One LSTM step on a (batch, dim) input.

    Gate layout in the fused weight matrices is [input, forget,
    candidate, output], each hidden_size wide.
    """
    hidden = h.data.shape[1]
    if wx.data.shape[1] != 4 * hidden or wh.data.shape != (hidden, 4 * hidden):
        raise ShapeError(
            "lstm weights expect gate width %d, got wx %s wh %s"
            % (4 * hidden, wx.data.shape, wh.data.shape)
        )
    if x.data.shape[1] != wx.data.shape[0]:
        raise ShapeError(
            "lstm input width %d does not match wx rows %d"
            % (x.data.shape[1], wx.data.shape[0])
        )
    gates = ad.add(ad.add(ad.matmul(x, wx), ad.matmul(h, wh)), b)
    i = ad.sigmoid(ad.cols(gates, 0, hidden))
    f = ad.sigmoid(ad.cols(gates, hidden, 2 * hidden))
    g = ad.tanh(ad.cols(gates, 2 * hidden, 3 * hidden))
    o = ad.sigmoid(ad.cols(gates, 3 * hidden, 4 * hidden))
    c_new = ad.add(ad.mul(f, c), ad.mul(i, g))
    h_new = ad.mul(o, ad.tanh(c_new))
    return h_new, c_new


@dataclass
class EncoderStates:
    """Per-position top-layer states h_i = [forward_i : backward_i] plus
    the two final states used to bridge into the decoder."""

    states: list[Var]
    final_forward: Var
    final_backward: Var
    mask: np.ndarray | None = None  # (batch, positions) 1/0, None = all real


def _scan_direction(
    inputs: list[Var],
    wx: Var,
    wh: Var,
    b: Var,
    hidden: int,
    reverse: bool,
    mask: np.ndarray | None,
) -> list[Var]:
    batch = inputs[0].data.shape[0]
    dtype = inputs[0].data.dtype
    h = ad.leaf(np.zeros((batch, hidden), dtype=dtype))
    c = ad.leaf(np.zeros((batch, hidden), dtype=dtype))
    order = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
    out: list[Var | None] = [None] * len(inputs)
    for j in order:
        h_new, c_new = lstm_cell(inputs[j], h, c, wx, wh, b)
        if mask is not None:
            # Padded positions carry the previous state through.
            m = ad.leaf(mask[:, j : j + 1].astype(dtype))
            inv = ad.leaf((1.0 - mask[:, j : j + 1]).astype(dtype))
            h = ad.add(ad.mul(h_new, m), ad.mul(h, inv))
            c = ad.add(ad.mul(c_new, m), ad.mul(c, inv))
        else:
            h, c = h_new, c_new
        out[j] = h
    return out  # type: ignore[return-value]


def bilstm_encode(
    embedded: list[Var],
    weights: dict[str, Var],
    layers: int,
    mask: np.ndarray | None = None,
    dropout_masks: list[tuple[np.ndarray, np.ndarray]] | None = None,
) -> EncoderStates:
    """Stacked bidirectional encoding of an embedded sequence.

    Directions are stacked independently (forward layers see only
    forward outputs, backward only backward), so forward states depend
    only on the prefix and backward states only on the suffix. Padded
    positions (mask 0) carry the previous state through.
    """
    if not embedded:
        raise ShapeError("cannot encode an empty sequence")
    fwd = embedded
    bwd = embedded
    for layer in range(layers):
        if dropout_masks is not None and layer > 0:
            dm_f, dm_b = dropout_masks[layer - 1]
            fwd = [ad.mul(v, ad.leaf(dm_f)) for v in fwd]
            bwd = [ad.mul(v, ad.leaf(dm_b)) for v in bwd]
        fwd = _scan_direction(
            fwd,
            weights["enc_l%d_f_wx" % layer],
            weights["enc_l%d_f_wh" % layer],
            weights["enc_l%d_f_b" % layer],
            weights["enc_l%d_f_wh" % layer].data.shape[0],
            reverse=False,
            mask=mask,
        )
        bwd = _scan_direction(
            bwd,
            weights["enc_l%d_b_wx" % layer],
            weights["enc_l%d_b_wh" % layer],
            weights["enc_l%d_b_b" % layer],
            weights["enc_l%d_b_wh" % layer].data.shape[0],
            reverse=True,
            mask=mask,
        )
    states = [ad.concat_cols([f, b]) for f, b in zip(fwd, bwd)]
    return EncoderStates(
        states=states, final_forward=fwd[-1], final_backward=bwd[0], mask=mask
    )


def attention_scores(
    enc: EncoderStates, h_prev: Var, w_prev_emb: Var, weights: dict[str, Var]
) -> Var:
    """Additive attention: softmax over e_j = v . tanh(W1 h_j + W2 h' + W3 w').

    Returns the (batch, positions) attention distribution; padded source
    positions are excluded via a large negative score offset.
    """
    query = ad.add(
        ad.matmul(h_prev, weights["att_w2"]), ad.matmul(w_prev_emb, weights["att_w3"])
    )
    scores = []
    for h_j in enc.states:
        e = ad.matmul(ad.tanh(ad.add(ad.matmul(h_j, weights["att_w1"]), query)),
                      weights["att_v"])
        scores.append(e)
    e_all = ad.concat_cols(scores)
    if enc.mask is not None:
        neg = (1.0 - enc.mask) * -1e9
        e_all = ad.add(e_all, ad.leaf(neg.astype(e_all.data.dtype)))
    return ad.softmax_rows(e_all)


def attention_context(att: Var, enc: EncoderStates) -> Var:
    """Context vector u = sum_j att_j * h_j."""
    ctx = None
    for j, h_j in enumerate(enc.states):
        term = ad.mul(ad.cols(att, j, j + 1), h_j)
        ctx = term if ctx is None else ad.add(ctx, term)
    return ctx


def dropout_mask(shape, p: float, rng: np.random.Generator, dtype) -> np.ndarray:
    """Inverted-dropout mask: survivors scaled by 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise ValueError("dropout rate must be in [0,1)")
    if p == 0.0:
        return np.ones(shape, dtype=dtype)
    keep = rng.random(shape) >= p
    return (keep / (1.0 - p)).astype(dtype)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float = 5.0):
    """Rescale so the global L2 norm is at most max_norm.

    Returns (clipped grads, pre-clip norm). A no-op when already within
    the bound.
    """
    total = 0.0
    for g in grads.values():
        total += float(np.sum(np.square(g, dtype=np.float64)))
    norm = math.sqrt(total)
    if norm <= max_norm or norm == 0.0:
        return grads, norm
    scale = max_norm / norm
    return {k: g * g.dtype.type(scale) for k, g in grads.items()}, norm


@dataclass
class AdamState:
    """First/second-moment accumulators and step counter."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState
) -> None:
    """One bias-corrected Adam update, in place."""
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for name, g in grads.items():
        p = params[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        p -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype)


def init_parameter_arrays(
    src_vocab_size: int,
    tgt_vocab_size: int,
    hidden: int,
    layers: int,
    rng: np.random.Generator,
    dtype=np.float32,
) -> dict[str, np.ndarray]:
    """Uniform(-0.1, 0.1) weights, zero biases, forget-gate bias +1.

    The embedding width equals the hidden size; encoder directions are
    independent stacks; the decoder's first layer consumes the previous
    target embedding concatenated with the attention context (width
    hidden + 2*hidden).
    """

    def uniform(*shape):
        return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape).astype(dtype)

    def lstm_bias():
        b = np.zeros((1, 4 * hidden), dtype=dtype)
        b[0, hidden : 2 * hidden] = FORGET_BIAS
        return b

    p: dict[str, np.ndarray] = {}
    p["src_emb"] = uniform(src_vocab_size, hidden)
    p["tgt_emb"] = uniform(tgt_vocab_size, hidden)
    for layer in range(layers):
        in_dim = hidden  # embeddings at layer 0, same width above
        for d in ("f", "b"):
            p["enc_l%d_%s_wx" % (layer, d)] = uniform(in_dim, 4 * hidden)
            p["enc_l%d_%s_wh" % (layer, d)] = uniform(hidden, 4 * hidden)
            p["enc_l%d_%s_b" % (layer, d)] = lstm_bias()
    for layer in range(layers):
        in_dim = 3 * hidden if layer == 0 else hidden
        p["dec_l%d_wx" % layer] = uniform(in_dim, 4 * hidden)
        p["dec_l%d_wh" % layer] = uniform(hidden, 4 * hidden)
        p["dec_l%d_b" % layer] = lstm_bias()
        p["bridge_l%d_wh" % layer] = uniform(2 * hidden, hidden)
        p["bridge_l%d_wc" % layer] = uniform(2 * hidden, hidden)
    p["att_w1"] = uniform(2 * hidden, hidden)
    p["att_w2"] = uniform(hidden, hidden)
    p["att_w3"] = uniform(hidden, hidden)
    p["att_v"] = uniform(hidden, 1)
    p["out_w"] = uniform(hidden, tgt_vocab_size)
    p["out_b"] = np.zeros((1, tgt_vocab_size), dtype=dtype)
    return p


def grad_check(value_fn, grad_fn, params: dict[str, np.ndarray],
               epsilon: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference grads.

    value_fn() -> scalar loss; grad_fn() -> dict name -> gradient array.
    Both must rebuild their graph from `params`, which are perturbed in
    place and must be float64. Relative error per component is
    |g_a - g_n| / max(1e-8, |g_a| + |g_n|).
    """
    for name, arr in params.items():
        if arr.dtype != np.float64:
            raise ValueError("grad_check requires float64 parameters (%s)" % name)
    analytic = grad_fn()
    worst = 0.0
    for name, arr in params.items():
        flat = arr.reshape(-1)
        g_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = value_fn()
            flat[i] = orig - epsilon
            down = value_fn()
            flat[i] = orig
            g_num = (up - down) / (2.0 * epsilon)
            g_ana = g_flat[i]
            rel = abs(g_ana - g_num) / max(1e-8, abs(g_ana) + abs(g_num))
            worst = max(worst, rel)
    return worst
