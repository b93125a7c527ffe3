"""Independent reference computations used by the tests.

Nothing here goes through the time-step machinery under test: unrolls are
written out by hand, one explicit module (or numpy expression) per step.
"""

from __future__ import annotations

import numpy as np

from seqnn.nn import Add, CAddTable, Linear, ParallelTable, Sequential, Sigmoid
from seqnn.rnn import Recurrent, lstm_cell_composite


def matmul_loops(a, b):
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for p in range(k):
                s += a[i, p] * b[p, j]
            out[i, j] = s
    return out


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def lstm_numpy(p, xs, h=None, c=None, cells=False):
    """Plain numpy LSTM with peepholes, gate order i, f, z, o.

    Returns the hidden states, or (hidden states, cell states) with ``cells``.
    """
    H = p["weight_h"].shape[1]
    B = xs[0].shape[0]
    h = np.zeros((B, H)) if h is None else h
    c = np.zeros((B, H)) if c is None else c
    Wx, Wh, b, peep = p["weight_x"], p["weight_h"], p["bias"], p["peephole"]
    hs, cs = [], []
    for x in xs:
        a = x @ Wx.T + h @ Wh.T + b
        i = sigmoid(a[:, :H] + peep[0] * c)
        f = sigmoid(a[:, H:2 * H] + peep[1] * c)
        z = np.tanh(a[:, 2 * H:3 * H])
        c = f * c + i * z
        o = sigmoid(a[:, 3 * H:] + peep[2] * c)
        h = o * np.tanh(c)
        hs.append(h)
        cs.append(c)
    return (hs, cs) if cells else hs


def unroll_lstm(lstm, xs, grad_hs, h0=None, c0=None):
    """Hand-unrolled LSTM from primitive-module cells aliasing ``lstm``'s storage.

    Returns (outputs, parameter gradients, input gradients). The layer's
    gradient buffers are zeroed first and hold the result afterwards.
    """
    cell = lstm_cell_composite(lstm)
    B, H = xs[0].shape[0], lstm.output_size
    h = np.zeros((B, H)) if h0 is None else h0
    c = np.zeros((B, H)) if c0 is None else c0
    steps = []
    for x in xs:
        clone = cell.shared_clone()
        inp = [x, h, c]
        h, c = clone.forward(inp)
        h, c = h.copy(), c.copy()
        steps.append((clone, inp))
    outs = [s[0].output[0].copy() for s in steps]
    lstm.zero_grad_parameters()
    gh_carry = np.zeros((B, H))
    gc_carry = np.zeros((B, H))
    grad_xs = [None] * len(xs)
    for t in reversed(range(len(xs))):
        clone, inp = steps[t]
        gx, gh_carry, gc_carry = clone.backward(inp, [grad_hs[t] + gh_carry, gc_carry])
        grad_xs[t] = gx.copy()
    return outs, {k: v.copy() for k, v in lstm.grads.items()}, grad_xs


def unroll_recurrent(rec, xs, grad_hs):
    """Hand-unrolled Recurrent: explicit per-step Sequentials sharing parameters.

    Works for a Recurrent whose input and feedback layers are Linear and whose
    transfer is elementwise. Returns (outputs, {id(param): grad}, input grads).
    """
    inp, fb = rec.input_layer, rec.feedback_layer
    start = Add(rec.start_size)
    start.params, start.grads = rec.params, rec.grads
    mods = []
    for t in range(len(xs)):
        if t == 0:
            m = Sequential(inp.shared_clone(), start, type(rec.transfer)())
        else:
            m = Sequential(ParallelTable(inp.shared_clone(), fb.shared_clone()), CAddTable(),
                           type(rec.transfer)())
        mods.append(m)
    outs, ins = [], []
    h = None
    for t, x in enumerate(xs):
        i = x if t == 0 else [x, h]
        h = mods[t].forward(i).copy()
        ins.append(i)
        outs.append(h)
    rec.zero_grad_parameters()
    carry = None
    grad_xs = [None] * len(xs)
    for t in reversed(range(len(xs))):
        g = grad_hs[t] if carry is None else grad_hs[t] + carry
        gin = mods[t].backward(ins[t], g)
        if t == 0:
            grad_xs[t] = gin.copy()
        else:
            grad_xs[t], carry = gin[0].copy(), gin[1].copy()
    grads = {id(p): g.copy() for p, g in rec.parameter_pairs()}
    return outs, grads, grad_xs


def recurrent_numpy(rec, xs):
    """Forward of a Recurrent(Linear, Linear, Sigmoid) written as plain formulas."""
    Wi, bi = rec.input_layer.params["weight"], rec.input_layer.params["bias"]
    Wf, bf = rec.feedback_layer.params["weight"], rec.feedback_layer.params["bias"]
    h = sigmoid(xs[0] @ Wi.T + bi + rec.params["bias"])
    hs = [h]
    for x in xs[1:]:
        h = sigmoid(x @ Wi.T + bi + h @ Wf.T + bf)
        hs.append(h)
    return hs


def make_recurrent(rng, n_in=3, hidden=4, rho=None):
    rec = Recurrent(hidden, Linear(n_in, hidden, rng=rng), Linear(hidden, hidden, rng=rng), Sigmoid(), rho=rho)
    rec.params["bias"][...] = 0.1 * rng.standard_normal(hidden)
    return rec


def truncated_suffix_oracle(lstm, xs, gs, rho):
    """Full BPTT over the last ``rho`` steps from a frozen incoming state."""
    k = len(xs) - rho
    h = c = None
    if k > 0:
        hs, cs = lstm_numpy(lstm.params, xs[:k], cells=True)
        h, c = hs[-1], cs[-1]
    return unroll_lstm(lstm, xs[k:], gs[k:], h, c)


def param_grads(module):
    return [g.copy() for _, g in module.parameter_pairs()]


def max_diff(a, b):
    return max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))
