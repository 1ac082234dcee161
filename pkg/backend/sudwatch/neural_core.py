"""
Dense numeric kernel with analytic gradients.

Everything is float64 numpy. Parameters live in flat dicts of arrays keyed
"<block>.<name>" (the layout the Adam optimizer walks); the small dataclasses
below are read-only views over one block.

Batched kernels take (B, T, ...) arrays plus a (B, T) 0/1 mask whose valid
steps form a prefix of each row. Masked steps produce zero outputs and receive
zero gradient.
"""

import logging
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .exceptions import CheckpointError, ShapeError

logger = logging.getLogger(__name__)

DTYPE = np.float64
PROB_FLOOR = 1e-12
CHECKPOINT_HEADER = 'd2s-ckpt v1'

Params = Dict[str, np.ndarray]


def keyed_rng(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, purpose, index); independent of call order."""
    key = np.random.SeedSequence([int(seed), zlib.crc32(purpose.encode('utf-8')), int(index)])
    return np.random.Generator(np.random.Philox(key))


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def block_of(params: Mapping[str, np.ndarray], prefix: str) -> Dict[str, np.ndarray]:
    head = prefix + '.'
    return {k[len(head):]: v for k, v in params.items() if k.startswith(head)}


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape: Tuple[int, ...]) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(DTYPE)


# ---------------------------------------------------------------- embeddings

def embed_mean(token_ids: Sequence[int], table: np.ndarray) -> np.ndarray:
    vocab, dim = table.shape
    if not len(token_ids):
        return np.zeros(dim, dtype=DTYPE)
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.min() < 0 or ids.max() >= vocab:
        raise ShapeError(f'token id out of range for a vocabulary of {vocab}')
    return table[ids].mean(axis=0)


def mean_pool_matrix(id_lists: Sequence[Sequence[int]], vocab_size: int) -> sparse.csr_matrix:
    """Row i averages the embedding rows of id_lists[i]; empty lists give a zero row."""
    rows, cols, vals = [], [], []
    for row, ids in enumerate(id_lists):
        if not len(ids):
            continue
        weight = 1.0 / len(ids)
        for token_id in ids:
            if not 0 <= token_id < vocab_size:
                raise ShapeError(f'token id {token_id} out of range for a vocabulary of {vocab_size}')
            rows.append(row)
            cols.append(token_id)
            vals.append(weight)
    return sparse.csr_matrix(
        (np.asarray(vals, dtype=DTYPE), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(len(id_lists), vocab_size),
    )


def embed_mean_batch(pool: sparse.csr_matrix, table: np.ndarray) -> np.ndarray:
    if pool.shape[1] != table.shape[0]:
        raise ShapeError(f'pooling matrix covers {pool.shape[1]} ids, table has {table.shape[0]} rows')
    return np.asarray(pool @ table)


def embed_mean_backward(pool: sparse.csr_matrix, grad_out: np.ndarray) -> np.ndarray:
    return np.asarray(pool.T @ grad_out)


# ---------------------------------------------------------------- dense

@dataclass(frozen=True)
class DenseParams:
    W: np.ndarray
    b: np.ndarray

    @classmethod
    def of(cls, params: Mapping[str, np.ndarray], prefix: str) -> 'DenseParams':
        block = block_of(params, prefix)
        return cls(block['W'], block['b'])


def init_dense(rng: np.random.Generator, prefix: str, n_in: int, n_out: int) -> Params:
    return {
        f'{prefix}.W': glorot(rng, n_in, n_out, (n_out, n_in)),
        f'{prefix}.b': np.zeros(n_out, dtype=DTYPE),
    }


def dense_forward(x: np.ndarray, p: DenseParams) -> np.ndarray:
    if x.shape[-1] != p.W.shape[1] or p.b.shape != (p.W.shape[0],):
        raise ShapeError(f'dense layer expects input {p.W.shape[1]}, got {x.shape[-1]}')
    return x @ p.W.T + p.b


def dense_backward(x: np.ndarray, grad_out: np.ndarray, p: DenseParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dW, db)."""
    return grad_out @ p.W, grad_out.T @ x, grad_out.sum(axis=0)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def dense_relu(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=DTYPE)
    return relu(dense_forward(x, DenseParams(np.asarray(W, dtype=DTYPE), np.asarray(b, dtype=DTYPE))))


# ---------------------------------------------------------------- LSTM

@dataclass(frozen=True)
class LSTMParams:
    """Gate blocks along the last axis are ordered input, forget, cell, output."""
    W_x: np.ndarray  # (D_in, 4H)
    W_h: np.ndarray  # (H, 4H)
    b: np.ndarray    # (4H,)

    @property
    def hidden(self) -> int:
        return self.W_h.shape[0]

    @classmethod
    def of(cls, params: Mapping[str, np.ndarray], prefix: str) -> 'LSTMParams':
        block = block_of(params, prefix)
        return cls(block['W_x'], block['W_h'], block['b'])

    def check(self, d_in: int) -> None:
        H = self.hidden
        if self.W_h.shape != (H, 4 * H) or self.b.shape != (4 * H,) or self.W_x.shape != (d_in, 4 * H):
            raise ShapeError(
                f'LSTM blocks W_x{self.W_x.shape} W_h{self.W_h.shape} b{self.b.shape} '
                f'do not fit input size {d_in}'
            )


@dataclass(frozen=True)
class BiLSTMParams:
    forward: LSTMParams
    backward: LSTMParams

    @classmethod
    def of(cls, params: Mapping[str, np.ndarray], prefix: str) -> 'BiLSTMParams':
        return cls(LSTMParams.of(params, f'{prefix}_fwd'), LSTMParams.of(params, f'{prefix}_bwd'))


def init_lstm(rng: np.random.Generator, prefix: str, d_in: int, hidden: int) -> Params:
    b = np.zeros(4 * hidden, dtype=DTYPE)
    b[hidden:2 * hidden] = 1.0
    return {
        f'{prefix}.W_x': glorot(rng, d_in, 4 * hidden, (d_in, 4 * hidden)),
        f'{prefix}.W_h': glorot(rng, hidden, 4 * hidden, (hidden, 4 * hidden)),
        f'{prefix}.b': b,
    }


def init_bilstm(rng: np.random.Generator, prefix: str, d_in: int, hidden: int) -> Params:
    params = init_lstm(rng, f'{prefix}_fwd', d_in, hidden)
    params.update(init_lstm(rng, f'{prefix}_bwd', d_in, hidden))
    return params


@dataclass
class _LSTMCache:
    X: np.ndarray
    mask: np.ndarray
    gates: np.ndarray      # (B, T, 4H) post-activation
    c_prev: np.ndarray     # (B, T, H)
    h_prev: np.ndarray     # (B, T, H)
    tanh_c: np.ndarray     # (B, T, H)


def lstm_forward(X: np.ndarray, mask: np.ndarray, p: LSTMParams) -> Tuple[np.ndarray, _LSTMCache]:
    B, T, d_in = X.shape
    p.check(d_in)
    H = p.hidden
    xw = X @ p.W_x + p.b
    h = np.zeros((B, H), dtype=DTYPE)
    c = np.zeros((B, H), dtype=DTYPE)
    gates = np.empty((B, T, 4 * H), dtype=DTYPE)
    c_prev = np.empty((B, T, H), dtype=DTYPE)
    h_prev = np.empty((B, T, H), dtype=DTYPE)
    tanh_c = np.empty((B, T, H), dtype=DTYPE)
    out = np.empty((B, T, H), dtype=DTYPE)
    for t in range(T):
        z = xw[:, t] + h @ p.W_h
        ifo = sigmoid(np.concatenate([z[:, :2 * H], z[:, 3 * H:]], axis=1))
        i, f, o = ifo[:, :H], ifo[:, H:2 * H], ifo[:, 2 * H:]
        g = np.tanh(z[:, 2 * H:3 * H])
        c_prev[:, t] = c
        h_prev[:, t] = h
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        gates[:, t] = np.concatenate([i, f, g, o], axis=1)
        tanh_c[:, t] = tc
        out[:, t] = h
    out *= mask[:, :, None]
    return out, _LSTMCache(X, mask, gates, c_prev, h_prev, tanh_c)


def lstm_backward(grad_out: np.ndarray, cache: _LSTMCache, p: LSTMParams) -> Tuple[np.ndarray, Params]:
    """Returns (dX, {'W_x', 'W_h', 'b'})."""
    B, T, _ = cache.X.shape
    H = p.hidden
    grad_out = grad_out * cache.mask[:, :, None]
    dZ = np.zeros((B, T, 4 * H), dtype=DTYPE)
    dh_next = np.zeros((B, H), dtype=DTYPE)
    dc_next = np.zeros((B, H), dtype=DTYPE)
    for t in reversed(range(T)):
        gate = cache.gates[:, t]
        i, f, g, o = gate[:, :H], gate[:, H:2 * H], gate[:, 2 * H:3 * H], gate[:, 3 * H:]
        tc = cache.tanh_c[:, t]
        dh = grad_out[:, t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dZ[:, t, :H] = dc * g * i * (1.0 - i)
        dZ[:, t, H:2 * H] = dc * cache.c_prev[:, t] * f * (1.0 - f)
        dZ[:, t, 2 * H:3 * H] = dc * i * (1.0 - g * g)
        dZ[:, t, 3 * H:] = dh * tc * o * (1.0 - o)
        dh_next = dZ[:, t] @ p.W_h.T
        dc_next = dc * f
    flat_dz = dZ.reshape(B * T, 4 * H)
    grads = {
        'W_x': cache.X.reshape(B * T, -1).T @ flat_dz,
        'W_h': cache.h_prev.reshape(B * T, H).T @ flat_dz,
        'b': flat_dz.sum(axis=0),
    }
    return dZ @ p.W_x.T, grads


def reverse_index(lengths: np.ndarray, T: int) -> np.ndarray:
    """(B, T) gather index reversing each row's valid prefix and leaving padding in place."""
    steps = np.arange(T)[None, :]
    lengths = lengths[:, None]
    return np.where(steps < lengths, lengths - 1 - steps, steps)


@dataclass
class _BiLSTMCache:
    rev: np.ndarray
    fwd: _LSTMCache
    bwd: _LSTMCache


def bilstm_forward_batch(X: np.ndarray, mask: np.ndarray, p: BiLSTMParams) -> Tuple[np.ndarray, _BiLSTMCache]:
    """(B, T, D_in) -> (B, T, 2H) with [h_fwd_t ; h_bwd_t] per step."""
    B, T, _ = X.shape
    rev = reverse_index(mask.sum(axis=1).astype(np.int64), T)
    rows = np.arange(B)[:, None]
    h_fwd, c_fwd = lstm_forward(X, mask, p.forward)
    h_rev, c_bwd = lstm_forward(X[rows, rev], mask, p.backward)
    out = np.concatenate([h_fwd, h_rev[rows, rev]], axis=2)
    return out, _BiLSTMCache(rev, c_fwd, c_bwd)


def bilstm_backward_batch(grad_out: np.ndarray, cache: _BiLSTMCache, p: BiLSTMParams) -> Tuple[np.ndarray, Params, Params]:
    """Returns (dX, forward-cell grads, backward-cell grads)."""
    H = p.forward.hidden
    B = grad_out.shape[0]
    rows = np.arange(B)[:, None]
    dX_f, g_f = lstm_backward(grad_out[:, :, :H], cache.fwd, p.forward)
    # rev is its own inverse
    dX_r, g_b = lstm_backward(grad_out[:, :, H:][rows, cache.rev], cache.bwd, p.backward)
    return dX_f + dX_r[rows, cache.rev], g_f, g_b


def bilstm_forward(seq: Sequence[np.ndarray], params: BiLSTMParams) -> List[np.ndarray]:
    if not len(seq):
        raise ShapeError('bilstm_forward needs a non-empty sequence')
    X = np.stack([np.asarray(x, dtype=DTYPE) for x in seq])[None]
    out, _ = bilstm_forward_batch(X, np.ones((1, len(seq)), dtype=DTYPE), params)
    return list(out[0])


# ---------------------------------------------------------------- attention

@dataclass(frozen=True)
class AttentionParams:
    W_a: np.ndarray  # (A, 2H)
    v_a: np.ndarray  # (A,)
    scoring: str = 'additive'

    @classmethod
    def of(cls, params: Mapping[str, np.ndarray], prefix: str, scoring: str = 'additive') -> 'AttentionParams':
        block = block_of(params, prefix)
        return cls(block['W_a'], block['v_a'], scoring)


def init_attention(rng: np.random.Generator, prefix: str, state_dim: int, attn_dim: int) -> Params:
    return {
        f'{prefix}.W_a': glorot(rng, state_dim, attn_dim, (attn_dim, state_dim)),
        f'{prefix}.v_a': rng.uniform(-0.1, 0.1, size=attn_dim).astype(DTYPE),
    }


@dataclass
class _AttentionCache:
    S: np.ndarray
    u: np.ndarray
    alpha: np.ndarray


def attention_forward(S: np.ndarray, mask: np.ndarray, p: AttentionParams) -> Tuple[np.ndarray, np.ndarray, _AttentionCache]:
    """Returns (context (B, 2H), weights (B, T), cache). Rows with no valid step get zero weights and context."""
    if S.shape[-1] != p.W_a.shape[1] or p.v_a.shape != (p.W_a.shape[0],):
        raise ShapeError(f'attention expects states of size {p.W_a.shape[1]}, got {S.shape[-1]}')
    pre = S @ p.W_a.T
    u = np.tanh(pre) if p.scoring == 'additive' else pre
    scores = u @ p.v_a
    valid = mask > 0
    scores = np.where(valid, scores, -np.inf)
    top = np.max(scores, axis=1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    weights = np.where(valid, np.exp(scores - top), 0.0)
    total = weights.sum(axis=1, keepdims=True)
    alpha = np.divide(weights, total, out=np.zeros_like(weights), where=total > 0)
    context = np.einsum('bt,btd->bd', alpha, S)
    return context, alpha, _AttentionCache(S, u, alpha)


def attention_backward(grad_ctx: np.ndarray, cache: _AttentionCache, p: AttentionParams) -> Tuple[np.ndarray, Params]:
    """Returns (dS, {'W_a', 'v_a'})."""
    S, u, alpha = cache.S, cache.u, cache.alpha
    d_alpha = np.einsum('btd,bd->bt', S, grad_ctx)
    dS = alpha[:, :, None] * grad_ctx[:, None, :]
    d_score = alpha * (d_alpha - (alpha * d_alpha).sum(axis=1, keepdims=True))
    A = p.v_a.shape[0]
    grads = {'v_a': u.reshape(-1, A).T @ d_score.reshape(-1)}
    d_pre = d_score[:, :, None] * p.v_a[None, None, :]
    if p.scoring == 'additive':
        d_pre = d_pre * (1.0 - u * u)
    grads['W_a'] = d_pre.reshape(-1, A).T @ S.reshape(-1, S.shape[-1])
    dS += d_pre @ p.W_a
    return dS, grads


def attention(states: Sequence[np.ndarray], params: AttentionParams) -> Tuple[np.ndarray, List[float]]:
    if not len(states):
        raise ShapeError('attention needs at least one state')
    S = np.stack([np.asarray(s, dtype=DTYPE) for s in states])[None]
    context, alpha, _ = attention_forward(S, np.ones((1, len(states)), dtype=DTYPE), params)
    return context[0], alpha[0].tolist()


# ---------------------------------------------------------------- output

def softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=DTYPE)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, label: int) -> float:
    probs = np.asarray(probs, dtype=DTYPE)
    if not 0 <= label < probs.shape[-1]:
        raise ShapeError(f'label {label} out of range for {probs.shape[-1]} classes')
    return float(-np.log(max(probs[label], PROB_FLOOR)))


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """Mean loss over the batch, probabilities, and d(loss)/d(logits)."""
    probs = softmax(logits)
    n = logits.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, PROB_FLOOR)).mean())
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, probs, grad / n


def dropout(x: np.ndarray, p: float = 0.2, mode: str = 'train', rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Inverted dropout. Returns (output, scaled keep-mask or None in eval mode)."""
    if not 0.0 <= p < 1.0:
        raise ValueError('dropout probability must be in [0, 1).')
    if mode == 'eval' or p == 0.0:
        return x, None
    keep = (rng.random(x.shape) >= p).astype(DTYPE) / (1.0 - p)
    return x * keep, keep


# ---------------------------------------------------------------- optimizer

@dataclass
class AdamState:
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_step(params: Params, grads: Mapping[str, np.ndarray], state: AdamState, lr: float) -> Tuple[Params, AdamState]:
    """Bias-corrected Adam update of every parameter named in grads, in place."""
    for name, g in grads.items():
        if name not in params:
            raise ShapeError(f"gradient for unknown parameter '{name}'")
        if g.shape != params[name].shape:
            raise ShapeError(f"gradient shape {g.shape} does not match parameter '{name}' {params[name].shape}")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    step_size = lr / bc1
    for name in sorted(grads):
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(params[name])
            state.v[name] = np.zeros_like(params[name])
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        params[name] -= step_size * m / (np.sqrt(v / bc2) + state.eps)
    return params, state


# ---------------------------------------------------------------- verification

def grad_check(
    model_fn: Callable[[Params], Tuple[float, Mapping[str, np.ndarray]]],
    params: Params,
    eps: float = 1e-5,
    names: Optional[Iterable[str]] = None,
    floor: float = 1e-8,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    model_fn(params) returns (loss, analytic grads). The error of one entry is
    |g_a - g_n| / max(floor, |g_a| + |g_n|).
    """
    _, analytic = model_fn(params)
    worst = 0.0
    for name in (names if names is not None else sorted(analytic)):
        value = params[name]
        flat = value.reshape(-1)
        g_a = np.asarray(analytic[name], dtype=DTYPE).reshape(-1)
        for idx in range(flat.size):
            saved = flat[idx]
            flat[idx] = saved + eps
            up, _ = model_fn(params)
            flat[idx] = saved - eps
            down, _ = model_fn(params)
            flat[idx] = saved
            g_n = (up - down) / (2.0 * eps)
            err = abs(g_a[idx] - g_n) / max(floor, abs(g_a[idx]) + abs(g_n))
            worst = max(worst, err)
    return worst


# ---------------------------------------------------------------- checkpoints

def save_checkpoint(path, arrays: Mapping[str, np.ndarray], metadata: Optional[Mapping[str, str]] = None) -> None:
    lines = [CHECKPOINT_HEADER]
    for key, value in (metadata or {}).items():
        if '\t' in key or '\n' in str(value) or '\t' in str(value):
            raise CheckpointError(f"metadata entry '{key}' may not contain tabs or newlines")
        lines.append(f'@{key}\t{value}')
    for name in sorted(arrays):
        array = np.asarray(arrays[name], dtype=DTYPE)
        if not np.all(np.isfinite(array)):
            raise CheckpointError(f"array '{name}' holds non-finite values")
        lines.append(' '.join([name] + [str(extent) for extent in array.shape]))
        flat = array.reshape(-1)
        for start in range(0, flat.size, 8):
            lines.append(' '.join('%.17g' % x for x in flat[start:start + 8]))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')


def load_checkpoint(path, expected: Optional[Mapping[str, Tuple[int, ...]]] = None) -> Tuple[Params, Dict[str, str]]:
    """Reads a checkpoint; when expected shapes are given, every named array must be present with that shape."""
    try:
        lines = Path(path).read_text(encoding='utf-8').splitlines()
    except OSError as exc:
        raise CheckpointError(f'cannot read checkpoint {path}: {exc.strerror}') from exc
    if not lines or lines[0].strip() != CHECKPOINT_HEADER:
        raise CheckpointError(f"{path} does not start with '{CHECKPOINT_HEADER}'", line=1)
    metadata: Dict[str, str] = {}
    arrays: Params = {}
    pos = 1
    while pos < len(lines) and lines[pos].startswith('@'):
        key, _, value = lines[pos][1:].partition('\t')
        metadata[key] = value
        pos += 1
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        head = lines[pos].split()
        try:
            shape = tuple(int(extent) for extent in head[1:])
        except ValueError as exc:
            raise CheckpointError(f"bad section header '{lines[pos]}'", line=pos + 1) from exc
        size = int(np.prod(shape)) if shape else 1
        values: List[float] = []
        pos += 1
        while len(values) < size and pos < len(lines):
            try:
                values.extend(float(tok) for tok in lines[pos].split())
            except ValueError as exc:
                raise CheckpointError(f"non-numeric value in section '{head[0]}'", line=pos + 1) from exc
            pos += 1
        if len(values) != size:
            raise CheckpointError(f"section '{head[0]}' declares {size} values, found {len(values)}", line=pos)
        arrays[head[0]] = np.asarray(values, dtype=DTYPE).reshape(shape)
    for name, shape in (expected or {}).items():
        if name not in arrays:
            raise CheckpointError(f"checkpoint {path} lacks section '{name}'")
        if arrays[name].shape != tuple(shape):
            raise CheckpointError(
                f"section '{name}' has shape {arrays[name].shape}, architecture needs {tuple(shape)}"
            )
    return arrays, metadata
