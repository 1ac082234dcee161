"""
History-aware SUD classifier, its ablation variants and the ablation harness.

For a target post whose author (or drug stream) posted p_1..p_T before it,
oldest first:

    step_t  = [e_S(p_t); e_E(p_t); tau_t]        tau_t = ln(1 + delta_t / 86400)
    S       = BiLSTM(step_1..step_T)              (T, 2H)
    context = attention(S)                        zero vector when T = 0
    z       = [context; mean(E_target[ids(target)])]
    probs   = softmax(W_o relu(W_d dropout(z) + b_d) + b_o)   over (SUDP, SUDA)

e_S and e_E are the penultimate activations of the trained sentiment and
emotion heads; they stay frozen unless joint fine-tuning is switched on.

Variants:
    NoAttention      context replaced by the mean of [e_S; e_E] over the history
    NoEntityMasking  every encoder reads raw (unmasked) text
    NoHistory        z = target encoding only
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .classifiers import (
    HeadModel,
    ModelDims,
    TrainConfig,
    Vocabulary,
    extract_features,
    fit,
    hidden_backward,
    hidden_forward,
    init_embedding,
    post_texts,
    report_for,
    train_head,
)
from .corpus import HISTORY_KEYS, Corpus, PostHistory, SplitSpec, history, require_task_labels, split
from .eval_stats import PRFReport, median_over_runs, metric_columns
from .exceptions import LabelError, ShapeError
from .neural_core import (
    DTYPE,
    PROB_FLOOR,
    AttentionParams,
    BiLSTMParams,
    DenseParams,
    Params,
    attention_backward,
    attention_forward,
    bilstm_backward_batch,
    bilstm_forward_batch,
    block_of,
    dense_backward,
    dense_forward,
    dropout,
    embed_mean_backward,
    embed_mean_batch,
    init_attention,
    init_bilstm,
    init_dense,
    keyed_rng,
    relu,
    softmax,
    softmax_cross_entropy,
)
from .ontology_store import Ontology

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0
SCORINGS = ('additive', 'dot')
EXTRACTOR_KEYS = ('embed.E', 'hidden.W', 'hidden.b')
EXTRACTOR_BLOCKS = ('sent', 'emo')


class AblationVariant(str, Enum):
    FULL = 'Full'
    NO_ATTENTION = 'NoAttention'
    NO_ENTITY_MASKING = 'NoEntityMasking'
    NO_HISTORY = 'NoHistory'

    @property
    def uses_history(self) -> bool:
        return self is not AblationVariant.NO_HISTORY

    @property
    def uses_recurrence(self) -> bool:
        return self in (AblationVariant.FULL, AblationVariant.NO_ENTITY_MASKING)


@dataclass(frozen=True)
class TemporalOptions:
    mask: bool = True
    time_feature: bool = True
    history_key: str = 'author'
    scoring: str = 'additive'
    freeze_extractors: bool = True

    def __post_init__(self):
        if self.history_key not in HISTORY_KEYS:
            raise ValueError(f"history_key must be one of: {', '.join(HISTORY_KEYS)}.")
        if self.scoring not in SCORINGS:
            raise ValueError(f"attention scoring must be one of: {', '.join(SCORINGS)}.")


def time_gap_feature(delta_seconds) -> np.ndarray:
    return np.log1p(np.asarray(delta_seconds, dtype=DTYPE) / SECONDS_PER_DAY)


def dense_input_dim(variant: AblationVariant, dims: ModelDims, feature_dim: int) -> int:
    if variant.uses_recurrence:
        return 2 * dims.hidden_dim + dims.embed_dim
    if variant is AblationVariant.NO_ATTENTION:
        return 2 * feature_dim + dims.embed_dim
    return dims.embed_dim


def init_temporal(
    variant: AblationVariant,
    vocab_size: int,
    dims: ModelDims,
    options: TemporalOptions,
    feature_dim: int,
    seed: int,
) -> Params:
    rng = keyed_rng(seed, f'temporal-init-{variant.value}')
    params = {'target.E': init_embedding(rng, vocab_size, dims.embed_dim)}
    if variant.uses_recurrence:
        step_dim = 2 * feature_dim + (1 if options.time_feature else 0)
        params.update(init_bilstm(rng, 'lstm', step_dim, dims.hidden_dim))
        params.update(init_attention(rng, 'attn', 2 * dims.hidden_dim, dims.attention_dim))
    params.update(init_dense(rng, 'dense', dense_input_dim(variant, dims, feature_dim), dims.dense_dim))
    params.update(init_dense(rng, 'out', dims.dense_dim, 2))
    return params


@dataclass(eq=False)
class TemporalSUDModel:
    variant: AblationVariant
    vocabulary: Vocabulary
    params: Params
    dims: ModelDims = ModelDims()
    options: TemporalOptions = TemporalOptions()
    sentiment_head: Optional[HeadModel] = None
    emotion_head: Optional[HeadModel] = None
    ontology: Optional[Ontology] = None

    def __post_init__(self):
        self.variant = AblationVariant(self.variant)
        if self.variant.uses_history:
            if self.sentiment_head is None or self.emotion_head is None:
                raise ValueError(f'{self.variant.value} needs trained sentiment and emotion heads.')
            if self.sentiment_head.feature_dim != self.emotion_head.feature_dim:
                raise ShapeError(
                    f'feature sizes differ: sentiment {self.sentiment_head.feature_dim}, '
                    f'emotion {self.emotion_head.feature_dim}'
                )
        expected = dense_input_dim(self.variant, self.dims, self.feature_dim)
        if self.params['dense.W'].shape[1] != expected:
            raise ShapeError(
                f"dense layer reads {self.params['dense.W'].shape[1]} inputs, {self.variant.value} produces {expected}"
            )

    @property
    def masked(self) -> bool:
        return self.options.mask and self.variant is not AblationVariant.NO_ENTITY_MASKING

    @property
    def feature_dim(self) -> int:
        if self.sentiment_head is not None:
            return self.sentiment_head.feature_dim
        return self.dims.feature_dim

    def extractor_params(self, block: str) -> Params:
        """Jointly tuned extractor weights when present, else the trained head's."""
        if f'{block}.embed.E' in self.params:
            return block_of(self.params, block)
        head = self.sentiment_head if block == 'sent' else self.emotion_head
        return head.params

    def extractor_vocabulary(self, block: str) -> Vocabulary:
        head = self.sentiment_head if block == 'sent' else self.emotion_head
        return head.vocabulary

    def texts(self, posts) -> List[str]:
        return post_texts(posts, self.masked, self.ontology)


@dataclass
class TemporalBatch:
    target_pool: sparse.csr_matrix
    steps: np.ndarray   # (B, T, step_dim)
    mask: np.ndarray    # (B, T), valid steps form a prefix
    labels: Optional[np.ndarray] = None


def build_steps(
    features: Sequence[np.ndarray],
    taus: Sequence[np.ndarray],
    feature_dim: int,
    time_feature: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    """Pads per-target (n_i, 2*D_h) feature blocks into (B, T, step_dim) with T >= 1."""
    B = len(features)
    T = max([1] + [len(f) for f in features])
    width = 2 * feature_dim
    steps = np.zeros((B, T, width + (1 if time_feature else 0)), dtype=DTYPE)
    mask = np.zeros((B, T), dtype=DTYPE)
    for b, (block, tau) in enumerate(zip(features, taus)):
        n = len(block)
        if not n:
            continue
        steps[b, :n, :width] = block
        if time_feature:
            steps[b, :n, width] = tau
        mask[b, :n] = 1.0
    return steps, mask


# ---------------------------------------------------------------- forward / backward

@dataclass
class _ForwardCache:
    batch: TemporalBatch
    zd: np.ndarray
    keep: Optional[np.ndarray]
    pre: np.ndarray
    hidden: np.ndarray
    lstm: object = None
    attn: object = None
    pool_weights: Optional[np.ndarray] = None


def temporal_logits(
    params: Params,
    batch: TemporalBatch,
    variant: AblationVariant,
    scoring: str,
    feature_dim: int,
    mode: str = 'eval',
    p_drop: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, np.ndarray, _ForwardCache]:
    """Returns (logits (B, 2), per-step history weights (B, T), cache)."""
    t_enc = embed_mean_batch(batch.target_pool, params['target.E'])
    B, T = batch.mask.shape
    weights = np.zeros((B, T), dtype=DTYPE)
    lstm_cache = attn_cache = pool_weights = None
    parts = []
    if variant.uses_recurrence:
        S, lstm_cache = bilstm_forward_batch(batch.steps, batch.mask, BiLSTMParams.of(params, 'lstm'))
        context, weights, attn_cache = attention_forward(S, batch.mask, AttentionParams.of(params, 'attn', scoring))
        parts.append(context)
    elif variant is AblationVariant.NO_ATTENTION:
        counts = batch.mask.sum(axis=1, keepdims=True)
        pool_weights = batch.mask / np.maximum(counts, 1.0)
        weights = pool_weights
        parts.append(np.einsum('bt,btd->bd', pool_weights, batch.steps[:, :, :2 * feature_dim]))
    parts.append(t_enc)
    z = np.concatenate(parts, axis=1)
    zd, keep = dropout(z, p_drop, mode, rng)
    pre = dense_forward(zd, DenseParams.of(params, 'dense'))
    hidden = relu(pre)
    logits = dense_forward(hidden, DenseParams.of(params, 'out'))
    cache = _ForwardCache(batch, zd, keep, pre, hidden, lstm_cache, attn_cache, pool_weights)
    return logits, weights, cache


def temporal_backward(
    d_logits: np.ndarray,
    cache: _ForwardCache,
    params: Params,
    variant: AblationVariant,
    scoring: str,
    feature_dim: int,
) -> Tuple[Params, np.ndarray]:
    """Returns (parameter grads, d(loss)/d(steps))."""
    grads: Params = {}
    d_hidden, grads['out.W'], grads['out.b'] = dense_backward(cache.hidden, d_logits, DenseParams.of(params, 'out'))
    d_pre = d_hidden * (cache.pre > 0)
    d_zd, grads['dense.W'], grads['dense.b'] = dense_backward(cache.zd, d_pre, DenseParams.of(params, 'dense'))
    dz = d_zd * cache.keep if cache.keep is not None else d_zd
    D = params['target.E'].shape[1]
    grads['target.E'] = embed_mean_backward(cache.batch.target_pool, dz[:, -D:])
    d_steps = np.zeros_like(cache.batch.steps)
    if variant.uses_recurrence:
        attn = AttentionParams.of(params, 'attn', scoring)
        bilstm = BiLSTMParams.of(params, 'lstm')
        dS, g_attn = attention_backward(dz[:, :-D], cache.attn, attn)
        d_steps, g_fwd, g_bwd = bilstm_backward_batch(dS, cache.lstm, bilstm)
        grads.update({f'attn.{k}': v for k, v in g_attn.items()})
        grads.update({f'lstm_fwd.{k}': v for k, v in g_fwd.items()})
        grads.update({f'lstm_bwd.{k}': v for k, v in g_bwd.items()})
    elif variant is AblationVariant.NO_ATTENTION:
        d_pooled = dz[:, :2 * feature_dim]
        d_steps[:, :, :2 * feature_dim] = cache.pool_weights[:, :, None] * d_pooled[:, None, :]
    return grads, d_steps


def temporal_loss(
    params: Params,
    batch: TemporalBatch,
    variant: AblationVariant,
    scoring: str,
    feature_dim: int,
    mode: str = 'eval',
    p_drop: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, Params, np.ndarray]:
    """Mean cross-entropy over the batch with its parameter grads and step grads."""
    logits, _, cache = temporal_logits(params, batch, variant, scoring, feature_dim, mode, p_drop, rng)
    loss, _, d_logits = softmax_cross_entropy(logits, batch.labels)
    grads, d_steps = temporal_backward(d_logits, cache, params, variant, scoring, feature_dim)
    return loss, grads, d_steps


def temporal_forward(
    history_: PostHistory,
    model: TemporalSUDModel,
    mode: str = 'eval',
    rng: Optional[np.random.Generator] = None,
    p_drop: float = 0.2,
) -> Tuple[np.ndarray, List[float]]:
    """Probabilities over (SUDP, SUDA) for the target post, and one weight per history step."""
    if mode == 'train' and rng is None:
        raise ValueError('train mode needs an rng for dropout.')
    fd = model.feature_dim
    target_pool = model.vocabulary.pool(model.texts([history_.target]))
    prior = [post for post, _ in history_.prior]
    if model.variant.uses_history and prior:
        texts = model.texts(prior)
        blocks = [
            hidden_forward(model.extractor_params(block), model.extractor_vocabulary(block).pool(texts))[0]
            for block in EXTRACTOR_BLOCKS
        ]
        features = np.concatenate(blocks, axis=1)
        taus = time_gap_feature(history_.delta_ts)
    else:
        features = np.zeros((0, 2 * fd), dtype=DTYPE)
        taus = np.zeros(0, dtype=DTYPE)
    steps, mask = build_steps([features], [taus], fd, model.options.time_feature)
    logits, weights, _ = temporal_logits(
        model.params, TemporalBatch(target_pool, steps, mask), model.variant,
        model.options.scoring, fd, mode, p_drop, rng,
    )
    n_steps = len(features)
    return softmax(logits)[0], weights[0, :n_steps].tolist()


# ---------------------------------------------------------------- training

@dataclass(frozen=True)
class TemporalReport:
    variant: AblationVariant
    seed: int
    best_epoch: int
    dev_macro_f1: float
    test: PRFReport
    epoch_losses: Tuple[float, ...]


class _TemporalData:
    """Corpus-wide arrays for one training run, addressed by corpus row."""

    def __init__(
        self,
        variant: AblationVariant,
        options: TemporalOptions,
        feature_dim: int,
        target_pool: sparse.csr_matrix,
        labels: np.ndarray,
        history_rows: List[np.ndarray],
        history_taus: List[np.ndarray],
        extractor_pools: Dict[str, sparse.csr_matrix],
        frozen_features: Optional[np.ndarray],
    ):
        self.variant = variant
        self.options = options
        self.feature_dim = feature_dim
        self.target_pool = target_pool
        self.labels = labels
        self.history_rows = history_rows
        self.history_taus = history_taus
        self.extractor_pools = extractor_pools
        self.frozen_features = frozen_features

    @property
    def joint(self) -> bool:
        return self.frozen_features is None and self.variant.uses_history

    def batch(self, params: Params, rows: np.ndarray):
        """Returns (batch, joint-tuning cache or None)."""
        fd = self.feature_dim
        empty = np.zeros((0, 2 * fd), dtype=DTYPE)
        joint_cache = None
        if not self.variant.uses_history:
            features = [empty for _ in rows]
        elif not self.joint:
            features = [self.frozen_features[self.history_rows[r]] for r in rows]
        else:
            needed = np.unique(np.concatenate([self.history_rows[r] for r in rows] + [np.zeros(0, dtype=np.int64)]))
            position = {int(row): k for k, row in enumerate(needed)}
            computed, caches = [], {}
            for block in EXTRACTOR_BLOCKS:
                pool = self.extractor_pools[block][needed]
                hidden, caches[block] = hidden_forward(block_of(params, block), pool)
                computed.append(hidden)
            table = np.concatenate(computed, axis=1) if len(needed) else empty
            slots = [np.asarray([position[int(r)] for r in self.history_rows[row]], dtype=np.int64) for row in rows]
            features = [table[s] for s in slots]
            joint_cache = (needed, slots, caches)
        taus = [self.history_taus[r] for r in rows]
        steps, mask = build_steps(features, taus, fd, self.options.time_feature)
        return TemporalBatch(self.target_pool[rows], steps, mask, self.labels[rows]), joint_cache

    def loss_and_grads(self, params: Params, rows: np.ndarray, mode: str, p_drop: float, rng) -> Tuple[float, Params]:
        batch, joint_cache = self.batch(params, rows)
        loss, grads, d_steps = temporal_loss(
            params, batch, self.variant, self.options.scoring, self.feature_dim, mode, p_drop, rng,
        )
        if joint_cache is not None and len(joint_cache[0]):
            needed, slots, caches = joint_cache
            fd = self.feature_dim
            d_table = np.zeros((len(needed), 2 * fd), dtype=DTYPE)
            for b, slot in enumerate(slots):
                if len(slot):
                    np.add.at(d_table, slot, d_steps[b, :len(slot), :2 * fd])
            for k, block in enumerate(EXTRACTOR_BLOCKS):
                block_grads = hidden_backward(
                    block_of(params, block), self.extractor_pools[block][needed],
                    caches[block], d_table[:, k * fd:(k + 1) * fd],
                )
                grads.update({f'{block}.{name}': g for name, g in block_grads.items()})
        return loss, grads

    def probs(self, params: Params, rows: np.ndarray) -> np.ndarray:
        batch, _ = self.batch(params, rows)
        logits, _, _ = temporal_logits(params, batch, self.variant, self.options.scoring, self.feature_dim)
        return softmax(logits)


def train_extractors(
    train: Corpus,
    dev: Corpus,
    config: TrainConfig,
    dims: ModelDims,
    masked: bool,
    ontology: Optional[Ontology],
) -> Tuple[HeadModel, HeadModel]:
    sentiment, _ = train_head(train, dev, 'sentiment', config, dims, masked=masked, ontology=ontology)
    emotion, _ = train_head(train, dev, 'emotion', config, dims, masked=masked, ontology=ontology)
    return sentiment, emotion


def history_index(corpus: Corpus, L: int, key: str) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    row_of = {post.id: i for i, post in enumerate(corpus.posts)}
    rows, taus = [], []
    for post in corpus.posts:
        found = history(corpus, post, L, key)
        rows.append(np.asarray([row_of[p.id] for p, _ in found.prior], dtype=np.int64))
        taus.append(time_gap_feature(found.delta_ts))
    return rows, taus


def split_rows(corpus: Corpus, spec: SplitSpec) -> Tuple[Tuple[Corpus, Corpus, Corpus], Tuple[np.ndarray, ...]]:
    """The three split corpora plus their posts' row indices into `corpus`."""
    parts = split(corpus, spec)
    if not all(len(part) for part in parts):
        sizes = '/'.join(str(len(part)) for part in parts)
        raise LabelError(f'split {spec.train}:{spec.dev}:{spec.test} left an empty part ({sizes} posts)')
    row_of = {post.id: i for i, post in enumerate(corpus.posts)}
    rows = tuple(np.asarray([row_of[p.id] for p in part.posts], dtype=np.int64) for part in parts)
    return parts, rows


def temporal_train(
    corpus: Corpus,
    ontology: Optional[Ontology],
    variant,
    config: TrainConfig,
    dims: ModelDims = ModelDims(),
    options: TemporalOptions = TemporalOptions(),
    split_spec: Optional[SplitSpec] = None,
    heads: Optional[Tuple[HeadModel, HeadModel]] = None,
) -> Tuple[TemporalSUDModel, TemporalReport]:
    """Trains one variant end to end and reports P/R/macro-F1 on the test split.

    Extractor heads are trained on the train/dev splits first unless given.
    """
    variant = AblationVariant(variant)
    labels = np.asarray(require_task_labels(corpus.posts, 'sud'), dtype=np.int64)
    spec = split_spec or SplitSpec(seed=config.seed)
    (train, dev, _), (train_rows, dev_rows, test_rows) = split_rows(corpus, spec)
    masked = options.mask and variant is not AblationVariant.NO_ENTITY_MASKING
    texts = post_texts(corpus.posts, masked, ontology)

    if variant.uses_history and heads is None:
        heads = train_extractors(train, dev, config, dims, masked, ontology)
    if not variant.uses_history:
        heads = None
    feature_dim = heads[0].feature_dim if heads else dims.feature_dim

    vocabulary = Vocabulary.build(texts[r] for r in train_rows)
    params = init_temporal(variant, len(vocabulary), dims, options, feature_dim, config.seed)
    extractor_pools: Dict[str, sparse.csr_matrix] = {}
    frozen = None
    if heads:
        extractor_pools = {block: head.vocabulary.pool(texts) for block, head in zip(EXTRACTOR_BLOCKS, heads)}
        if options.freeze_extractors:
            frozen = np.concatenate([extract_features(texts, head) for head in heads], axis=1)
        else:
            for block, head in zip(EXTRACTOR_BLOCKS, heads):
                params.update({f'{block}.{k}': head.params[k].copy() for k in EXTRACTOR_KEYS})
        history_rows, history_taus = history_index(corpus, dims.history_window, options.history_key)
    else:
        history_rows = [np.zeros(0, dtype=np.int64)] * len(corpus)
        history_taus = [np.zeros(0, dtype=DTYPE)] * len(corpus)

    data = _TemporalData(
        variant, options, feature_dim, vocabulary.pool(texts), labels,
        history_rows, history_taus, extractor_pools, frozen,
    )

    def step(p, idx, rng):
        return data.loss_and_grads(p, train_rows[idx], 'train', config.dropout, rng)

    def dev_score(p):
        return report_for(labels[dev_rows], data.probs(p, dev_rows).argmax(axis=1), 2).macro_f1

    def train_loss(p):
        probs = data.probs(p, train_rows)
        picked = probs[np.arange(len(train_rows)), labels[train_rows]]
        return float(-np.log(np.maximum(picked, PROB_FLOOR)).mean())

    result = fit(
        params, len(train_rows), step, dev_score,
        epochs=config.epochs, lr=config.lr_temporal, batch_size=config.batch_temporal,
        seed=config.seed, purpose=f'temporal-{variant.value}', loss_fn=train_loss,
    )
    model = TemporalSUDModel(
        variant=variant, vocabulary=vocabulary, params=result.params, dims=dims, options=options,
        sentiment_head=heads[0] if heads else None, emotion_head=heads[1] if heads else None,
        ontology=ontology,
    )
    test_report = report_for(labels[test_rows], data.probs(model.params, test_rows).argmax(axis=1), 2)
    logger.info(
        '%s seed %d: best epoch %d, dev macro-F1 %.4f, test P %.4f R %.4f macro-F1 %.4f',
        variant.value, config.seed, result.best_epoch, result.best_score,
        test_report.macro_precision, test_report.macro_recall, test_report.macro_f1,
    )
    return model, TemporalReport(
        variant=variant, seed=config.seed, best_epoch=result.best_epoch,
        dev_macro_f1=result.best_score, test=test_report, epoch_losses=tuple(result.epoch_losses),
    )


def predict_corpus(model: TemporalSUDModel, corpus: Corpus) -> np.ndarray:
    """(N, 2) probabilities for every post, histories drawn from the corpus itself."""
    rows = []
    for post in corpus.posts:
        probs, _ = temporal_forward(history(corpus, post, model.dims.history_window, model.options.history_key), model)
        rows.append(probs)
    return np.asarray(rows, dtype=DTYPE).reshape(len(rows), 2)


# ---------------------------------------------------------------- ablation

@dataclass(frozen=True)
class AblationRun:
    variant: AblationVariant
    seed: int
    report: PRFReport


@dataclass(frozen=True)
class AblationSummary:
    variant: AblationVariant
    runs: int
    precision: float
    recall: float
    macro_f1: float
    delta_precision: float
    delta_recall: float
    delta_macro_f1: float


def _run_seed(job) -> List[AblationRun]:
    corpus, ontology, variants, config, dims, options, seed = job
    config = replace(config, seed=seed)
    spec = SplitSpec(seed=seed)
    train, dev, _ = split(corpus, spec)
    extractors: Dict[bool, Tuple[HeadModel, HeadModel]] = {}
    runs = []
    for variant in variants:
        heads = None
        if variant.uses_history:
            masked = options.mask and variant is not AblationVariant.NO_ENTITY_MASKING
            if masked not in extractors:
                extractors[masked] = train_extractors(train, dev, config, dims, masked, ontology)
            heads = extractors[masked]
        _, report = temporal_train(corpus, ontology, variant, config, dims, options, spec, heads)
        runs.append(AblationRun(variant=variant, seed=seed, report=report.test))
    return runs


def summarize_ablation(runs: Sequence[AblationRun], variants: Sequence[AblationVariant]) -> List[AblationSummary]:
    medians = {}
    for variant in variants:
        reports = [run.report for run in runs if run.variant is variant]
        medians[variant] = (len(reports), median_over_runs(metric_columns(reports)))
    _, full = medians[AblationVariant.FULL]
    summaries = []
    for variant in variants:
        count, m = medians[variant]
        summaries.append(AblationSummary(
            variant=variant,
            runs=count,
            precision=m['precision'],
            recall=m['recall'],
            macro_f1=m['macro_f1'],
            delta_precision=full['precision'] - m['precision'],
            delta_recall=full['recall'] - m['recall'],
            delta_macro_f1=full['macro_f1'] - m['macro_f1'],
        ))
    return summaries


def ablation_report(
    corpus: Corpus,
    ontology: Optional[Ontology],
    config: TrainConfig,
    runs: int = 1,
    seeds: Optional[Sequence[int]] = None,
    dims: ModelDims = ModelDims(),
    options: TemporalOptions = TemporalOptions(),
    variants: Sequence = tuple(AblationVariant),
    jobs: int = 1,
) -> Tuple[List[AblationRun], List[AblationSummary]]:
    """Trains every variant once per seed; medians per variant with (Full - variant) deltas.

    Each seed fixes the split, the extractor heads (shared by the variants that
    read the same text) and every variant's initialization. Results do not
    depend on the worker count.
    """
    if runs < 1:
        raise ValueError('runs must be >= 1.')
    seeds = list(seeds) if seeds else [config.seed + i for i in range(runs)]
    if len(seeds) < runs:
        raise ValueError(f'{runs} runs requested but only {len(seeds)} seeds given.')
    seeds = seeds[:runs]
    if len(set(seeds)) != len(seeds):
        raise ValueError('run seeds must be distinct.')
    variants = [AblationVariant(v) for v in variants]
    if AblationVariant.FULL not in variants:
        raise ValueError('the ablation needs the Full variant as its reference.')

    work = [(corpus, ontology, variants, config, dims, options, seed) for seed in seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            chunks = list(pool.map(_run_seed, work))
    else:
        chunks = [_run_seed(job) for job in work]
    all_runs = [run for chunk in chunks for run in chunk]
    summaries = summarize_ablation(all_runs, variants)
    for summary in summaries:
        logger.info(
            'ablation %s: median macro-F1 %.4f (delta %.4f over %d runs)',
            summary.variant.value, summary.macro_f1, summary.delta_macro_f1, summary.runs,
        )
    return all_runs, summaries
