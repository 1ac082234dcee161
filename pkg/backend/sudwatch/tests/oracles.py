"""Straight-line scalar re-implementations used as independent oracles."""

import math
from typing import List, Sequence


def _sig(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def lstm_scalar(seq: Sequence[Sequence[float]], W_x, W_h, b) -> List[List[float]]:
    """One direction, gates ordered input, forget, cell, output along 4H."""
    H = len(W_h)
    h = [0.0] * H
    c = [0.0] * H
    out = []
    for x in seq:
        z = []
        for j in range(4 * H):
            total = float(b[j])
            for k, xk in enumerate(x):
                total += float(xk) * float(W_x[k][j])
            for k in range(H):
                total += h[k] * float(W_h[k][j])
            z.append(total)
        new_c, new_h = [], []
        for j in range(H):
            i = _sig(z[j])
            f = _sig(z[H + j])
            g = math.tanh(z[2 * H + j])
            o = _sig(z[3 * H + j])
            cj = f * c[j] + i * g
            new_c.append(cj)
            new_h.append(o * math.tanh(cj))
        c, h = new_c, new_h
        out.append(h)
    return out


def bilstm_scalar(seq, fwd, bwd) -> List[List[float]]:
    forward = lstm_scalar(seq, *fwd)
    backward = list(reversed(lstm_scalar(list(reversed(seq)), *bwd)))
    return [f + r for f, r in zip(forward, backward)]


def attention_scalar(states, W_a, v_a, additive: bool = True):
    scores = []
    for s in states:
        total = 0.0
        for a, row in enumerate(W_a):
            pre = sum(float(w) * float(x) for w, x in zip(row, s))
            total += float(v_a[a]) * (math.tanh(pre) if additive else pre)
        scores.append(total)
    top = max(scores)
    ex = [math.exp(s - top) for s in scores]
    norm = sum(ex)
    alpha = [e / norm for e in ex]
    context = [sum(alpha[t] * float(states[t][d]) for t in range(len(states))) for d in range(len(states[0]))]
    return context, alpha


def dense_scalar(x, W, b, relu: bool = False):
    out = []
    for row, bias in zip(W, b):
        value = float(bias) + sum(float(w) * float(v) for w, v in zip(row, x))
        out.append(max(0.0, value) if relu else value)
    return out


def softmax_scalar(logits):
    top = max(logits)
    ex = [math.exp(v - top) for v in logits]
    total = sum(ex)
    return [e / total for e in ex]
