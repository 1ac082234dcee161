"""
Bag-of-embeddings encoders, task heads and the shared mini-batch training loop.

A head reads a post as the mean of its token embeddings (D), passes it through
a ReLU hidden layer (D -> D_h) and a softmax output layer (D_h -> K). The
hidden activation is the feature vector the temporal model consumes.

Head parameters are a flat dict:
    embed.E   (V, D)
    hidden.W  (D_h, D)    hidden.b  (D_h,)
    out.W     (K, D_h)    out.b     (K,)
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .corpus import Corpus, Post, mask_entities, require_task_labels
from .eval_stats import PRFReport, confusion_matrix, prf
from .exceptions import CheckpointError, LabelError, ShapeError
from .labels import MASK_TOKENS, TASK_LABELS
from .neural_core import (
    DTYPE,
    AdamState,
    DenseParams,
    Params,
    adam_step,
    dense_backward,
    dense_forward,
    dropout,
    embed_mean_backward,
    embed_mean_batch,
    init_dense,
    keyed_rng,
    load_checkpoint,
    mean_pool_matrix,
    relu,
    save_checkpoint,
    softmax,
    softmax_cross_entropy,
)
from .ontology_store import Ontology
from .text_utils import tokenize

logger = logging.getLogger(__name__)

UNK_TOKEN = '<unk>'
EMBED_INIT_SCALE = 0.1


@dataclass(frozen=True)
class ModelDims:
    embed_dim: int = 32       # D
    feature_dim: int = 32     # D_h
    hidden_dim: int = 16      # H
    attention_dim: int = 16   # A
    dense_dim: int = 32       # D_f
    history_window: int = 10  # L

    def __post_init__(self):
        if self.embed_dim < 2:
            raise ValueError('embed_dim must be >= 2.')
        if min(self.feature_dim, self.hidden_dim, self.attention_dim, self.dense_dim) < 1:
            raise ValueError('model dimensions must be >= 1.')
        if self.history_window < 0:
            raise ValueError('history_window must be >= 0.')


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    lr_head: float = 1e-3
    lr_temporal: float = 1e-3
    batch_head: int = 32
    batch_temporal: int = 64
    dropout: float = 0.2
    seed: int = 13

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError('epochs must be >= 0.')
        if self.lr_head <= 0 or self.lr_temporal <= 0:
            raise ValueError('learning rates must be positive.')
        if self.batch_head < 1 or self.batch_temporal < 1:
            raise ValueError('batch sizes must be >= 1.')
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError('dropout must be in [0, 1).')


@dataclass(frozen=True)
class Vocabulary:
    """Token list; id 0 is the out-of-vocabulary token, mask tokens always follow it."""
    tokens: Tuple[str, ...]

    @cached_property
    def index(self) -> Dict[str, int]:
        return {token: i for i, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def ids(self, text: str) -> List[int]:
        index = self.index
        return [index.get(token, 0) for token in tokenize(text)]

    def pool(self, texts: Sequence[str]) -> sparse.csr_matrix:
        return mean_pool_matrix([self.ids(text) for text in texts], len(self))

    @classmethod
    def build(cls, texts: Iterable[str]) -> 'Vocabulary':
        reserved = (UNK_TOKEN,) + MASK_TOKENS
        seen = set()
        for text in texts:
            seen.update(tokenize(text))
        return cls(tokens=reserved + tuple(sorted(seen.difference(reserved))))


def init_embedding(rng: np.random.Generator, vocab_size: int, dim: int) -> np.ndarray:
    return rng.normal(0.0, EMBED_INIT_SCALE, size=(vocab_size, dim)).astype(DTYPE)


@dataclass(eq=False)
class HeadModel:
    task: str
    vocabulary: Vocabulary
    params: Params
    masked: bool = True

    def __post_init__(self):
        if self.task not in TASK_LABELS:
            raise LabelError(f"unknown task '{self.task}'")
        K = len(TASK_LABELS[self.task])
        V = len(self.vocabulary)
        E = self.params['embed.E']
        D, D_h = E.shape[1], self.params['hidden.W'].shape[0]
        expected = {
            'embed.E': (V, D),
            'hidden.W': (D_h, D),
            'hidden.b': (D_h,),
            'out.W': (K, D_h),
            'out.b': (K,),
        }
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ShapeError(
                    f"{self.task} head parameter '{name}' has shape {self.params[name].shape}, expected {shape}"
                )

    @property
    def labels(self) -> Tuple[str, ...]:
        return TASK_LABELS[self.task]

    @property
    def feature_dim(self) -> int:
        return self.params['hidden.W'].shape[0]


@dataclass(frozen=True)
class HeadReport:
    task: str
    best_epoch: int
    dev: PRFReport
    epoch_losses: Tuple[float, ...]


def init_head(task: str, vocabulary: Vocabulary, dims: ModelDims, seed: int) -> Params:
    rng = keyed_rng(seed, f'head-init-{task}')
    params = {'embed.E': init_embedding(rng, len(vocabulary), dims.embed_dim)}
    params.update(init_dense(rng, 'hidden', dims.embed_dim, dims.feature_dim))
    params.update(init_dense(rng, 'out', dims.feature_dim, len(TASK_LABELS[task])))
    return params


# ---------------------------------------------------------------- head kernels

def hidden_forward(params: Params, pool: sparse.csr_matrix) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """Penultimate activations relu(W_h mean(E[ids]) + b_h) for every row of pool."""
    x = embed_mean_batch(pool, params['embed.E'])
    pre = dense_forward(x, DenseParams.of(params, 'hidden'))
    return relu(pre), (x, pre)


def hidden_backward(params: Params, pool: sparse.csr_matrix, cache, d_hidden: np.ndarray) -> Params:
    x, pre = cache
    d_pre = d_hidden * (pre > 0)
    dx, dW, db = dense_backward(x, d_pre, DenseParams.of(params, 'hidden'))
    return {'embed.E': embed_mean_backward(pool, dx), 'hidden.W': dW, 'hidden.b': db}


def head_logits(params: Params, pool: sparse.csr_matrix) -> np.ndarray:
    hidden, _ = hidden_forward(params, pool)
    return dense_forward(hidden, DenseParams.of(params, 'out'))


def head_loss(
    params: Params,
    pool: sparse.csr_matrix,
    labels: np.ndarray,
    mode: str = 'train',
    p_drop: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, Params]:
    hidden, cache = hidden_forward(params, pool)
    dropped, keep = dropout(hidden, p_drop, mode, rng)
    out = DenseParams.of(params, 'out')
    logits = dense_forward(dropped, out)
    loss, _, d_logits = softmax_cross_entropy(logits, labels)
    d_dropped, dW, db = dense_backward(dropped, d_logits, out)
    d_hidden = d_dropped * keep if keep is not None else d_dropped
    grads = hidden_backward(params, pool, cache, d_hidden)
    grads['out.W'] = dW
    grads['out.b'] = db
    return loss, grads


# ---------------------------------------------------------------- training loop

@dataclass
class FitResult:
    params: Params
    best_epoch: int
    best_score: float
    epoch_losses: List[float] = field(default_factory=list)


def _copy(params: Params) -> Params:
    return {name: value.copy() for name, value in params.items()}


def fit(
    params: Params,
    n_train: int,
    step_fn: Callable[[Params, np.ndarray, np.random.Generator], Tuple[float, Params]],
    score_fn: Callable[[Params], float],
    epochs: int,
    lr: float,
    batch_size: int,
    seed: int,
    purpose: str,
    loss_fn: Optional[Callable[[Params], float]] = None,
) -> FitResult:
    """Adam over seeded mini-batches; keeps the parameters with the best dev score.

    The untrained parameters count as epoch 0, so epochs=0 returns them. Each
    epoch's loss is loss_fn(params) at the epoch end when given, otherwise the
    mean training-batch loss.
    """
    state = AdamState()
    best = FitResult(params=_copy(params), best_epoch=0, best_score=score_fn(params))
    step = 0
    for epoch in range(1, epochs + 1):
        order = keyed_rng(seed, f'{purpose}-shuffle', epoch).permutation(n_train)
        batch_losses = []
        for start in range(0, n_train, batch_size):
            idx = order[start:start + batch_size]
            loss, grads = step_fn(params, idx, keyed_rng(seed, f'{purpose}-dropout', step))
            adam_step(params, grads, state, lr)
            batch_losses.append(loss)
            step += 1
        epoch_loss = loss_fn(params) if loss_fn is not None else float(np.mean(batch_losses))
        best.epoch_losses.append(epoch_loss)
        score = score_fn(params)
        logger.debug('%s epoch %d loss %.6f dev %.4f', purpose, epoch, epoch_loss, score)
        if score > best.best_score:
            best.params = _copy(params)
            best.best_epoch = epoch
            best.best_score = score
    return best


def report_for(labels: Sequence[int], predicted: Sequence[int], n_classes: int) -> PRFReport:
    return prf(confusion_matrix(labels, predicted, n_classes))


# ---------------------------------------------------------------- heads

def post_texts(posts: Sequence[Post], masked: bool, ontology: Optional[Ontology]) -> List[str]:
    """Texts as the encoders see them. Without an ontology the texts are taken as already masked."""
    if masked and ontology is not None:
        return [mask_entities(post, ontology) for post in posts]
    return [post.text for post in posts]


def train_head(
    train: Corpus,
    dev: Corpus,
    task: str,
    config: TrainConfig,
    dims: ModelDims = ModelDims(),
    vocabulary: Optional[Vocabulary] = None,
    masked: bool = True,
    ontology: Optional[Ontology] = None,
) -> Tuple[HeadModel, HeadReport]:
    if task not in TASK_LABELS:
        raise LabelError(f"unknown task '{task}'")
    if not len(train) or not len(dev):
        raise LabelError(f'{task} head needs non-empty train and dev splits (got {len(train)} and {len(dev)})')
    y_train = np.asarray(require_task_labels(train.posts, task), dtype=np.int64)
    y_dev = np.asarray(require_task_labels(dev.posts, task), dtype=np.int64)
    train_texts = post_texts(train.posts, masked, ontology)
    vocabulary = vocabulary or Vocabulary.build(train_texts)
    pool_train = vocabulary.pool(train_texts)
    pool_dev = vocabulary.pool(post_texts(dev.posts, masked, ontology))
    K = len(TASK_LABELS[task])

    def step(params, idx, rng):
        return head_loss(params, pool_train[idx], y_train[idx], 'train', config.dropout, rng)

    def dev_score(params):
        predicted = head_logits(params, pool_dev).argmax(axis=1)
        return report_for(y_dev, predicted, K).macro_f1

    def train_loss(params):
        loss, _, _ = softmax_cross_entropy(head_logits(params, pool_train), y_train)
        return loss

    result = fit(
        init_head(task, vocabulary, dims, config.seed), len(train), step, dev_score,
        epochs=config.epochs, lr=config.lr_head, batch_size=config.batch_head,
        seed=config.seed, purpose=f'head-{task}', loss_fn=train_loss,
    )
    head = HeadModel(task=task, vocabulary=vocabulary, params=result.params, masked=masked)
    dev_report = report_for(y_dev, head_logits(head.params, pool_dev).argmax(axis=1), K)
    logger.info(
        '%s head: %d train / %d dev posts, vocabulary %d, best epoch %d, dev macro-F1 %.4f',
        task, len(train), len(dev), len(vocabulary), result.best_epoch, dev_report.macro_f1,
    )
    report = HeadReport(task=task, best_epoch=result.best_epoch, dev=dev_report,
                        epoch_losses=tuple(result.epoch_losses))
    return head, report


def extract_feature_vec(post: Post, head: HeadModel, masked: bool, ontology: Optional[Ontology] = None) -> np.ndarray:
    """Penultimate (post-ReLU) activation of head for the post, length D_h."""
    return extract_features(post_texts([post], masked, ontology), head)[0]


def extract_features(texts: Sequence[str], head: HeadModel) -> np.ndarray:
    """Feature rows (len(texts), D_h) of already prepared texts."""
    hidden, _ = hidden_forward(head.params, head.vocabulary.pool(texts))
    return hidden


def predict_head(head: HeadModel, texts: Sequence[str]) -> np.ndarray:
    """Class probabilities, one row per text."""
    return softmax(head_logits(head.params, head.vocabulary.pool(texts)))


def evaluate_head(head: HeadModel, corpus: Corpus, ontology: Optional[Ontology] = None) -> Tuple[PRFReport, List[dict]]:
    """Metrics plus one record per post (id, gold, predicted, loss)."""
    if not len(corpus):
        raise LabelError('cannot evaluate on an empty corpus')
    gold = require_task_labels(corpus.posts, head.task)
    probs = predict_head(head, post_texts(corpus.posts, head.masked, ontology))
    predicted = probs.argmax(axis=1)
    labels = head.labels
    examples = []
    for post, g, p, row in zip(corpus.posts, gold, predicted, probs):
        examples.append({
            'id': post.id,
            'gold': labels[g],
            'predicted': labels[int(p)],
            'loss': float(-np.log(max(row[g], 1e-12))),
        })
    return report_for(gold, predicted, len(labels)), examples


# ---------------------------------------------------------------- checkpoints

def save_head(head: HeadModel, path) -> None:
    save_checkpoint(path, head.params, {
        'task': head.task,
        'masked': '1' if head.masked else '0',
        'vocab': ' '.join(head.vocabulary.tokens),
    })
    logger.info('saved %s head to %s', head.task, path)


def load_head(path) -> HeadModel:
    arrays, metadata = load_checkpoint(path)
    for key in ('task', 'vocab'):
        if key not in metadata:
            raise CheckpointError(f"checkpoint {path} lacks the '@{key}' entry")
    vocabulary = Vocabulary(tokens=tuple(metadata['vocab'].split(' ')))
    missing = [name for name in ('embed.E', 'hidden.W', 'hidden.b', 'out.W', 'out.b') if name not in arrays]
    if missing:
        raise CheckpointError(f"checkpoint {path} lacks section '{missing[0]}'")
    try:
        return HeadModel(
            task=metadata['task'],
            vocabulary=vocabulary,
            params=arrays,
            masked=metadata.get('masked', '1') == '1',
        )
    except (ShapeError, LabelError) as exc:
        raise CheckpointError(f'checkpoint {path} does not match the head architecture: {exc}') from exc
