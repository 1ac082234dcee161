"""
Comparison baselines for SUD classification.

LR_POS_TFIDF  logistic regression over TF-IDF 1-3 grams plus coarse POS-bucket counts
H_RNN         static hashed character n-gram embeddings through a sigmoid RNN, history then target
H_LSTM        trainable mean embeddings through an LSTM with attention, single sigmoid output

All three read the same split as the temporal model and report on its test part.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from sklearn.feature_extraction.text import HashingVectorizer, TfidfVectorizer
from sklearn.linear_model import LogisticRegression

from .classifiers import ModelDims, TrainConfig, Vocabulary, fit, init_embedding, post_texts, report_for
from .corpus import Corpus, SplitSpec, require_task_labels
from .eval_stats import PRFReport
from .exceptions import LabelError
from .neural_core import (
    DTYPE,
    PROB_FLOOR,
    AttentionParams,
    DenseParams,
    LSTMParams,
    Params,
    attention_backward,
    attention_forward,
    dense_backward,
    dense_forward,
    embed_mean_backward,
    embed_mean_batch,
    glorot,
    init_attention,
    init_dense,
    init_lstm,
    keyed_rng,
    lstm_backward,
    lstm_forward,
    mean_pool_matrix,
    sigmoid,
    softmax,
    softmax_cross_entropy,
)
from .ontology_store import Ontology
from .temporal import TemporalOptions, history_index, split_rows
from .text_utils import is_mask_token, tokenize

logger = logging.getLogger(__name__)

LR_C = 1e4
LR_MAX_ITER = 2000
HASH_FEATURES = 2 ** 12
CHAR_NGRAMS = (3, 5)

POS_BUCKETS = ('NOUN', 'VERB', 'ADJ', 'ADV', 'PRON', 'FUNC')
PRONOUNS = frozenset(
    'i me my mine myself you your yours yourself he him his himself she her hers herself '
    'it its itself we us our ours ourselves they them their theirs themselves'.split()
)
FUNCTION_WORDS = frozenset(
    'a an the and or but nor so yet if then than because while of in on at to for from by with '
    'about into over under after before through during without within this that these those '
    'there here not no'.split()
)
AUXILIARIES = frozenset(
    'am is are was were be been being do does did done have has had having '
    'can could will would shall should may might must get got gets'.split()
)
ADVERBS = frozenset('very really just too also still never always again almost already soon often'.split())
VERB_SUFFIXES = ('ing', 'ed', 'ize', 'ise', 'ate', 'en')
ADJ_SUFFIXES = ('ful', 'less', 'ous', 'ive', 'able', 'ible', 'al', 'ic', 'ish', 'y')


class Baseline(str, Enum):
    LR_POS_TFIDF = 'LR_POS_TFIDF'
    H_RNN = 'H_RNN'
    H_LSTM = 'H_LSTM'


@dataclass(frozen=True)
class BaselineReport:
    baseline: Baseline
    seed: int
    test: PRFReport
    best_epoch: Optional[int] = None


# ---------------------------------------------------------------- POS buckets

def pos_bucket(token: str) -> str:
    """Coarse tag from closed-class lists and suffix rules. Mask tokens count as nouns."""
    if is_mask_token(token):
        return 'NOUN'
    if token in PRONOUNS:
        return 'PRON'
    if token in FUNCTION_WORDS or not any(ch.isalpha() for ch in token):
        return 'FUNC'
    if token in AUXILIARIES:
        return 'VERB'
    if token in ADVERBS or (token.endswith('ly') and len(token) > 4):
        return 'ADV'
    if len(token) > 4 and token.endswith(VERB_SUFFIXES):
        return 'VERB'
    if len(token) > 3 and token.endswith(ADJ_SUFFIXES):
        return 'ADJ'
    return 'NOUN'


def pos_counts(texts: Sequence[str]) -> np.ndarray:
    counts = np.zeros((len(texts), len(POS_BUCKETS)), dtype=DTYPE)
    column = {bucket: k for k, bucket in enumerate(POS_BUCKETS)}
    for i, text in enumerate(texts):
        for token in tokenize(text):
            counts[i, column[pos_bucket(token)]] += 1.0
    return counts


# ---------------------------------------------------------------- LR over TF-IDF + POS

def _lr_features(vectorizer: TfidfVectorizer, texts: Sequence[str]) -> sparse.csr_matrix:
    return sparse.hstack([vectorizer.transform(texts), sparse.csr_matrix(pos_counts(texts))], format='csr')


def _run_lr(texts, labels, rows, seed) -> Tuple[np.ndarray, None]:
    train_rows, _, test_rows = rows
    if len(np.unique(labels[train_rows])) < 2:
        raise LabelError('the training split holds a single SUD class; logistic regression needs both.')
    vectorizer = TfidfVectorizer(tokenizer=tokenize, lowercase=False, token_pattern=None, ngram_range=(1, 3))
    vectorizer.fit([texts[r] for r in train_rows])
    model = LogisticRegression(C=LR_C, max_iter=LR_MAX_ITER, random_state=seed)
    model.fit(_lr_features(vectorizer, [texts[r] for r in train_rows]), labels[train_rows])
    return model.predict(_lr_features(vectorizer, [texts[r] for r in test_rows])), None


# ---------------------------------------------------------------- shared sequence batching

def _sequences(history_rows: List[np.ndarray], rows: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """History rows oldest first followed by the target row; lengths >= 1."""
    seqs = [np.append(history_rows[r], r).astype(np.int64) for r in rows]
    return seqs, np.asarray([len(s) for s in seqs], dtype=np.int64)


def _padded(table: np.ndarray, seqs: List[np.ndarray], lengths: np.ndarray) -> np.ndarray:
    X = np.zeros((len(seqs), int(lengths.max()), table.shape[1]), dtype=DTYPE)
    for b, seq in enumerate(seqs):
        X[b, :len(seq)] = table[seq]
    return X


# ---------------------------------------------------------------- H_RNN

def subword_embeddings(texts: Sequence[str], dim: int, seed: int) -> np.ndarray:
    """Mean of hashed character n-gram vectors per text, drawn from a fixed seeded table."""
    vectorizer = HashingVectorizer(
        analyzer='char_wb', ngram_range=CHAR_NGRAMS, n_features=HASH_FEATURES,
        alternate_sign=False, norm=None, lowercase=True,
    )
    counts = vectorizer.transform(texts)
    table = keyed_rng(seed, 'subword-table').normal(0.0, 1.0, size=(HASH_FEATURES, dim)).astype(DTYPE)
    totals = np.asarray(counts.sum(axis=1)).ravel()
    return np.asarray(counts @ table) / np.maximum(totals, 1.0)[:, None]


def init_rnn(dim: int, hidden: int, seed: int) -> Params:
    rng = keyed_rng(seed, 'baseline-init-H_RNN')
    params = {
        'rnn.W_x': glorot(rng, dim, hidden, (dim, hidden)),
        'rnn.W_h': glorot(rng, hidden, hidden, (hidden, hidden)),
        'rnn.b': np.zeros(hidden, dtype=DTYPE),
    }
    params.update(init_dense(rng, 'out', hidden, 2))
    return params


def rnn_forward(params: Params, X: np.ndarray, lengths: np.ndarray):
    """Sigmoid recurrence; returns (state at step length-1, cache)."""
    B, T, _ = X.shape
    H = params['rnn.b'].shape[0]
    h = np.zeros((B, H), dtype=DTYPE)
    states = np.empty((B, T, H), dtype=DTYPE)
    prev = np.empty((B, T, H), dtype=DTYPE)
    for t in range(T):
        prev[:, t] = h
        h = sigmoid(X[:, t] @ params['rnn.W_x'] + h @ params['rnn.W_h'] + params['rnn.b'])
        states[:, t] = h
    final = states[np.arange(B), lengths - 1]
    return final, (X, states, prev, lengths)


def rnn_backward(params: Params, cache, d_final: np.ndarray) -> Params:
    X, states, prev, lengths = cache
    B, T, _ = X.shape
    d_states = np.zeros_like(states)
    d_states[np.arange(B), lengths - 1] = d_final
    grads = {k: np.zeros_like(params[k]) for k in ('rnn.W_x', 'rnn.W_h', 'rnn.b')}
    dh_next = np.zeros_like(d_final)
    for t in reversed(range(T)):
        s = states[:, t]
        da = (d_states[:, t] + dh_next) * s * (1.0 - s)
        grads['rnn.W_x'] += X[:, t].T @ da
        grads['rnn.W_h'] += prev[:, t].T @ da
        grads['rnn.b'] += da.sum(axis=0)
        dh_next = da @ params['rnn.W_h'].T
    return grads


def rnn_loss(params: Params, X: np.ndarray, lengths: np.ndarray, labels: np.ndarray) -> Tuple[float, Params]:
    final, cache = rnn_forward(params, X, lengths)
    out = DenseParams.of(params, 'out')
    loss, _, d_logits = softmax_cross_entropy(dense_forward(final, out), labels)
    d_final, dW, db = dense_backward(final, d_logits, out)
    grads = rnn_backward(params, cache, d_final)
    grads.update({'out.W': dW, 'out.b': db})
    return loss, grads


def rnn_probs(params: Params, X: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    final, _ = rnn_forward(params, X, lengths)
    return softmax(dense_forward(final, DenseParams.of(params, 'out')))


# ---------------------------------------------------------------- H_LSTM

def init_attention_lstm(vocab_size: int, dims: ModelDims, seed: int) -> Params:
    rng = keyed_rng(seed, 'baseline-init-H_LSTM')
    params = {'embed.E': init_embedding(rng, vocab_size, dims.embed_dim)}
    params.update(init_lstm(rng, 'lstm', dims.embed_dim, dims.hidden_dim))
    params.update(init_attention(rng, 'attn', dims.hidden_dim, dims.attention_dim))
    params.update(init_dense(rng, 'out', dims.hidden_dim, 1))
    return params


def _step_pool(ids: List[List[int]], seqs: List[np.ndarray], T: int, vocab_size: int) -> sparse.csr_matrix:
    """(B*T, V) pooling matrix; padded steps are empty rows."""
    id_lists = []
    for seq in seqs:
        id_lists.extend(ids[r] for r in seq)
        id_lists.extend([] for _ in range(T - len(seq)))
    return mean_pool_matrix(id_lists, vocab_size)


def attention_lstm_forward(params: Params, pool: sparse.csr_matrix, mask: np.ndarray, scoring: str = 'additive'):
    """Returns (P(SUDP) per row, cache)."""
    B, T = mask.shape
    X = embed_mean_batch(pool, params['embed.E']).reshape(B, T, -1)
    lstm = LSTMParams.of(params, 'lstm')
    S, lstm_cache = lstm_forward(X, mask, lstm)
    attn = AttentionParams.of(params, 'attn', scoring)
    ctx, _, attn_cache = attention_forward(S, mask, attn)
    logit = dense_forward(ctx, DenseParams.of(params, 'out'))[:, 0]
    return sigmoid(logit), (ctx, lstm_cache, attn_cache)


def attention_lstm_loss(
    params: Params, pool: sparse.csr_matrix, mask: np.ndarray, positive: np.ndarray, scoring: str = 'additive',
) -> Tuple[float, Params]:
    """Binary cross-entropy against positive (1 = SUDP)."""
    B, T = mask.shape
    p, (ctx, lstm_cache, attn_cache) = attention_lstm_forward(params, pool, mask, scoring)
    loss = float(-(positive * np.log(np.maximum(p, PROB_FLOOR))
                   + (1.0 - positive) * np.log(np.maximum(1.0 - p, PROB_FLOOR))).mean())
    out = DenseParams.of(params, 'out')
    d_ctx, dW, db = dense_backward(ctx, ((p - positive) / B)[:, None], out)
    attn = AttentionParams.of(params, 'attn', scoring)
    dS, attn_grads = attention_backward(d_ctx, attn_cache, attn)
    dX, lstm_grads = lstm_backward(dS, lstm_cache, LSTMParams.of(params, 'lstm'))
    grads = {'out.W': dW, 'out.b': db, 'embed.E': embed_mean_backward(pool, dX.reshape(B * T, -1))}
    grads.update({f'attn.{k}': g for k, g in attn_grads.items()})
    grads.update({f'lstm.{k}': g for k, g in lstm_grads.items()})
    return loss, grads


# ---------------------------------------------------------------- runner

def _sequence_batches(history_rows, rows):
    seqs, lengths = _sequences(history_rows, rows)
    mask = (np.arange(int(lengths.max()))[None, :] < lengths[:, None]).astype(DTYPE)
    return seqs, lengths, mask


def _run_rnn(texts, labels, rows, history_rows, config: TrainConfig, dims: ModelDims):
    train_rows, dev_rows, test_rows = rows
    table = subword_embeddings(texts, dims.embed_dim, config.seed)

    def batch(r):
        seqs, lengths, _ = _sequence_batches(history_rows, r)
        return _padded(table, seqs, lengths), lengths

    def step(p, idx, rng):
        X, lengths = batch(train_rows[idx])
        return rnn_loss(p, X, lengths, labels[train_rows[idx]])

    def predict(p, r):
        return rnn_probs(p, *batch(r)).argmax(axis=1)

    result = fit(
        init_rnn(dims.embed_dim, dims.hidden_dim, config.seed), len(train_rows), step,
        lambda p: report_for(labels[dev_rows], predict(p, dev_rows), 2).macro_f1,
        epochs=config.epochs, lr=config.lr_temporal, batch_size=config.batch_temporal,
        seed=config.seed, purpose='baseline-H_RNN',
    )
    return predict(result.params, test_rows), result.best_epoch


def _run_attention_lstm(texts, labels, rows, history_rows, config: TrainConfig, dims: ModelDims, scoring: str):
    train_rows, dev_rows, test_rows = rows
    vocabulary = Vocabulary.build(texts[r] for r in train_rows)
    ids = [vocabulary.ids(text) for text in texts]
    positive = (labels == 0).astype(DTYPE)

    def batch(r):
        seqs, _, mask = _sequence_batches(history_rows, r)
        return _step_pool(ids, seqs, mask.shape[1], len(vocabulary)), mask

    def step(p, idx, rng):
        pool, mask = batch(train_rows[idx])
        return attention_lstm_loss(p, pool, mask, positive[train_rows[idx]], scoring)

    def predict(p, r):
        probs, _ = attention_lstm_forward(p, *batch(r), scoring)
        return np.where(probs >= 0.5, 0, 1)

    result = fit(
        init_attention_lstm(len(vocabulary), dims, config.seed), len(train_rows), step,
        lambda p: report_for(labels[dev_rows], predict(p, dev_rows), 2).macro_f1,
        epochs=config.epochs, lr=config.lr_temporal, batch_size=config.batch_temporal,
        seed=config.seed, purpose='baseline-H_LSTM',
    )
    return predict(result.params, test_rows), result.best_epoch


def run_baseline(
    corpus: Corpus,
    baseline,
    config: TrainConfig,
    dims: ModelDims = ModelDims(),
    options: TemporalOptions = TemporalOptions(),
    ontology: Optional[Ontology] = None,
    split_spec: Optional[SplitSpec] = None,
) -> BaselineReport:
    """Trains one baseline on the train split and reports P/R/macro-F1 on test.

    Texts are masked when options.mask is on and an ontology is given. Posts
    without prior history run the recurrent baselines on the target alone.
    """
    baseline = Baseline(baseline)
    labels = np.asarray(require_task_labels(corpus.posts, 'sud'), dtype=np.int64)
    _, rows = split_rows(corpus, split_spec or SplitSpec(seed=config.seed))
    texts = post_texts(corpus.posts, options.mask, ontology)

    if baseline is Baseline.LR_POS_TFIDF:
        predicted, best_epoch = _run_lr(texts, labels, rows, config.seed)
    else:
        history_rows, _ = history_index(corpus, dims.history_window, options.history_key)
        if baseline is Baseline.H_RNN:
            predicted, best_epoch = _run_rnn(texts, labels, rows, history_rows, config, dims)
        else:
            predicted, best_epoch = _run_attention_lstm(texts, labels, rows, history_rows, config, dims, options.scoring)

    report = report_for(labels[rows[2]], predicted, 2)
    logger.info(
        '%s seed %d: test P %.4f R %.4f macro-F1 %.4f',
        baseline.value, config.seed, report.macro_precision, report.macro_recall, report.macro_f1,
    )
    return BaselineReport(baseline=baseline, seed=config.seed, test=report, best_epoch=best_epoch)


def baseline_runs(
    corpus: Corpus,
    baselines: Sequence,
    config: TrainConfig,
    seeds: Sequence[int],
    dims: ModelDims = ModelDims(),
    options: TemporalOptions = TemporalOptions(),
    ontology: Optional[Ontology] = None,
) -> Dict[Baseline, List[BaselineReport]]:
    """Each baseline once per seed; the seed fixes both the split and the initialization."""
    reports: Dict[Baseline, List[BaselineReport]] = {}
    for name in baselines:
        baseline = Baseline(name)
        reports[baseline] = [
            run_baseline(corpus, baseline, replace(config, seed=seed), dims, options, ontology, SplitSpec(seed=seed))
            for seed in seeds
        ]
    return reports
