"""
Post corpus: ingestion, drug tagging and masking, sampling, splitting and history lookup.

Corpus file (UTF-8, tab-separated, one post per line):
    id, author, source, timestamp, sentiment|-, emotion|-, sud|-, text[, drug_tags]
Text escapes: \\t, \\n, \\r and \\\\.
"""

import bisect
import logging
import re
import zlib
from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import datetime, timezone as dt_timezone
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .exceptions import CorpusFormatError, LabelError
from .labels import TASK_FIELDS, TASK_LABELS, DrugCategory
from .neural_core import keyed_rng
from .ontology_store import Ontology, find_drug_mentions, mask_token_for, mention_categories
from .serializers import NONE_MARK, PostRecordSerializer, first_error
from .text_utils import MASK_RE

logger = logging.getLogger(__name__)

CORPUS_FIELDS = (
    'id', 'author', 'source', 'timestamp',
    'sentiment_label', 'emotion_label', 'sud_label', 'text',
)
HISTORY_KEYS = ('author', 'drug_stream')
STRATIFY_KEYS = ('drug_category', 'sud_label', 'both')

_CATEGORY_ORDER = {category: index for index, category in enumerate(DrugCategory)}
_MASK_CATEGORY = {category.mask_token: category for category in DrugCategory}
_ESCAPES = {'t': '\t', 'n': '\n', 'r': '\r', '\\': '\\'}
_ESCAPE_RE = re.compile(r'\\(.)')


@dataclass(frozen=True)
class Post:
    id: str
    author: str
    source: str
    timestamp: int
    text: str
    drug_tags: FrozenSet[DrugCategory] = frozenset()
    sentiment_label: Optional[str] = None
    emotion_label: Optional[str] = None
    sud_label: Optional[str] = None

    def label(self, task: str) -> Optional[str]:
        return getattr(self, TASK_FIELDS[task])

    @property
    def sorted_tags(self) -> List[DrugCategory]:
        return sorted(self.drug_tags, key=_CATEGORY_ORDER.__getitem__)


@dataclass(frozen=True)
class PostHistory:
    target: Post
    prior: Tuple[Tuple[Post, int], ...] = ()
    window: int = 10

    @property
    def delta_ts(self) -> List[int]:
        return [delta for _, delta in self.prior]


@dataclass(frozen=True)
class SplitSpec:
    train: int = 75
    dev: int = 5
    test: int = 20
    seed: int = 0

    def __post_init__(self):
        if min(self.train, self.dev, self.test) < 0 or self.train + self.dev + self.test != 100:
            raise ValueError(
                f'split parts must be non-negative and sum to 100, got {self.train}:{self.dev}:{self.test}.'
            )


@dataclass(frozen=True)
class Corpus:
    posts: Tuple[Post, ...] = ()
    tagged: bool = False

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self):
        return iter(self.posts)

    @cached_property
    def by_id(self) -> Dict[str, Post]:
        return {post.id: post for post in self.posts}

    @cached_property
    def _streams(self) -> Dict[Tuple[str, object], Tuple[List[int], List[Post]]]:
        """(key kind, key value) -> (timestamps, posts), both sorted by (timestamp, id)."""
        grouped = defaultdict(list)
        for post in self.posts:
            grouped[('author', post.author)].append(post)
            for tag in post.drug_tags:
                grouped[('drug_stream', tag)].append(post)
        streams = {}
        for key, posts in grouped.items():
            posts.sort(key=lambda p: (p.timestamp, p.id))
            streams[key] = ([p.timestamp for p in posts], posts)
        return streams

    def with_posts(self, posts: Iterable[Post]) -> 'Corpus':
        return Corpus(posts=tuple(posts), tagged=self.tagged)


def _unescape(text: str) -> str:
    return _ESCAPE_RE.sub(lambda m: _ESCAPES.get(m.group(1), m.group(0)), text)


def escape_text(text: str) -> str:
    return text.replace('\\', '\\\\').replace('\t', '\\t').replace('\n', '\\n').replace('\r', '\\r')


def format_timestamp(seconds: int) -> str:
    return datetime.fromtimestamp(seconds, tz=dt_timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')


def parse_post_line(raw_line: str, line_no: int) -> Tuple[Post, bool]:
    """Returns the post and whether the line carried a drug-tag column."""
    parts = raw_line.rstrip('\r\n').split('\t')
    if len(parts) not in (len(CORPUS_FIELDS), len(CORPUS_FIELDS) + 1):
        raise CorpusFormatError(
            f'expected {len(CORPUS_FIELDS)} or {len(CORPUS_FIELDS) + 1} tab-separated fields, got {len(parts)}',
            line=line_no,
        )
    data = dict(zip(CORPUS_FIELDS, parts))
    data['text'] = _unescape(data['text'])
    has_tags = len(parts) > len(CORPUS_FIELDS)
    if has_tags:
        data['drug_tags'] = parts[-1]
    serializer = PostRecordSerializer(data=data)
    if not serializer.is_valid():
        raise CorpusFormatError(first_error(serializer.errors), line=line_no)
    values = serializer.validated_data
    post = Post(
        id=values['id'],
        author=values['author'],
        source=values['source'],
        timestamp=values['timestamp'],
        text=values['text'],
        drug_tags=values['drug_tags'],
        sentiment_label=values['sentiment_label'],
        emotion_label=values['emotion_label'],
        sud_label=values['sud_label'],
    )
    return post, has_tags


def parse_corpus(lines: Iterable[str]) -> Corpus:
    posts: List[Post] = []
    seen: Dict[str, int] = {}
    tagged = False
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith('#'):
            continue
        post, has_tags = parse_post_line(line, line_no)
        if post.id in seen:
            raise CorpusFormatError(
                f"duplicate post id '{post.id}' (first on line {seen[post.id]})", line=line_no
            )
        seen[post.id] = line_no
        tagged = tagged or has_tags
        posts.append(post)
    return Corpus(posts=tuple(posts), tagged=tagged)


def ingest(path) -> Corpus:
    with Path(path).open(encoding='utf-8') as handle:
        corpus = parse_corpus(handle)
    logger.info('ingested %d posts from %s', len(corpus), path)
    return corpus


def post_row(post: Post, with_tags: bool) -> str:
    cells = [
        post.id,
        post.author,
        post.source,
        format_timestamp(post.timestamp),
        post.sentiment_label or NONE_MARK,
        post.emotion_label or NONE_MARK,
        post.sud_label or NONE_MARK,
        escape_text(post.text),
    ]
    if with_tags:
        cells.append(','.join(tag.value for tag in post.sorted_tags) or NONE_MARK)
    return '\t'.join(cells)


def write_corpus(corpus: Corpus, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        for post in corpus.posts:
            handle.write(post_row(post, corpus.tagged) + '\n')
    logger.info('wrote %d posts to %s', len(corpus), path)


def tag_drugs(corpus: Corpus, ontology: Ontology) -> Corpus:
    """drug_tags = categories of all gazetteer matches plus categories of mask tokens already in the text."""
    tagged = []
    for post in corpus.posts:
        tags = set(mention_categories(ontology, find_drug_mentions(ontology, post.text)))
        tags.update(_MASK_CATEGORY[m.group(0)] for m in MASK_RE.finditer(post.text) if m.group(0) in _MASK_CATEGORY)
        tagged.append(replace(post, drug_tags=frozenset(tags)))
    return Corpus(posts=tuple(tagged), tagged=True)


def mask_entities(post: Post, ontology: Ontology) -> str:
    """post.text with every drug mention replaced by its category mask token."""
    text = post.text
    matches = find_drug_mentions(ontology, text)
    if not matches:
        return text
    pieces = []
    cursor = 0
    for match in matches:
        pieces.append(text[cursor:match.start])
        pieces.append(mask_token_for(ontology, match.concept_id))
        cursor = match.end
    pieces.append(text[cursor:])
    return ''.join(pieces)


def mask_corpus(corpus: Corpus, ontology: Ontology) -> Corpus:
    return corpus.with_posts(replace(p, text=mask_entities(p, ontology)) for p in corpus.posts)


def _stratum_key(post: Post, stratify_by: str) -> str:
    primary = post.sorted_tags[0].value if post.drug_tags else 'untagged'
    sud = post.sud_label or NONE_MARK
    if stratify_by == 'drug_category':
        return primary
    if stratify_by == 'sud_label':
        return sud
    return f'{primary}|{sud}'


def _stratum_rng(seed: int, purpose: str, key: str):
    return keyed_rng(seed, purpose, zlib.crc32(key.encode('utf-8')))


def stratified_sample(corpus: Corpus, per_stratum: int, stratify_by: str, seed: int) -> Corpus:
    """Draw min(per_stratum, size) posts per stratum without replacement; output keeps corpus order.

    Drug strata use a post's first tag in category order; untagged posts form their own stratum.
    """
    if per_stratum < 1:
        raise ValueError('per_stratum must be >= 1.')
    if stratify_by not in STRATIFY_KEYS:
        raise ValueError(f"stratify_by must be one of: {', '.join(STRATIFY_KEYS)}.")
    strata: Dict[str, List[int]] = defaultdict(list)
    for index, post in enumerate(corpus.posts):
        strata[_stratum_key(post, stratify_by)].append(index)
    chosen = set()
    for key in sorted(strata):
        members = strata[key]
        take = min(per_stratum, len(members))
        picks = _stratum_rng(seed, 'sample', key).choice(len(members), size=take, replace=False)
        chosen.update(members[int(i)] for i in picks)
    return corpus.with_posts(p for i, p in enumerate(corpus.posts) if i in chosen)


def split_quotas(n: int, spec: SplitSpec) -> Tuple[int, int, int]:
    """Largest-remainder apportionment of n posts; ties go train, then test, then dev."""
    shares = {'train': spec.train, 'dev': spec.dev, 'test': spec.test}
    quotas = {name: n * pct // 100 for name, pct in shares.items()}
    remainders = {name: n * pct % 100 for name, pct in shares.items()}
    tie_order = ('train', 'test', 'dev')
    leftover = n - sum(quotas.values())
    for name in sorted(tie_order, key=lambda name: (-remainders[name], tie_order.index(name)))[:leftover]:
        quotas[name] += 1
    return quotas['train'], quotas['dev'], quotas['test']


def split(corpus: Corpus, spec: SplitSpec) -> Tuple[Corpus, Corpus, Corpus]:
    """Label-stratified train/dev/test partition; each part keeps corpus order."""
    strata: Dict[str, List[int]] = defaultdict(list)
    for index, post in enumerate(corpus.posts):
        strata[post.sud_label or NONE_MARK].append(index)
    assignment: Dict[int, int] = {}
    for key in sorted(strata):
        members = strata[key]
        n_train, n_dev, _ = split_quotas(len(members), spec)
        order = _stratum_rng(spec.seed, 'split', key).permutation(len(members))
        for rank, pos in enumerate(order):
            part = 0 if rank < n_train else 1 if rank < n_train + n_dev else 2
            assignment[members[int(pos)]] = part
    parts = ([], [], [])
    for index, post in enumerate(corpus.posts):
        parts[assignment[index]].append(post)
    return tuple(corpus.with_posts(p) for p in parts)


def history(corpus: Corpus, target: Post, L: int, key: str = 'author') -> PostHistory:
    """The L most recent posts strictly before target sharing its author (or a drug tag)."""
    if key not in HISTORY_KEYS:
        raise ValueError(f"history key must be one of: {', '.join(HISTORY_KEYS)}.")
    if target.id not in corpus.by_id:
        raise ValueError(f"post '{target.id}' is not in the corpus.")
    if L <= 0:
        return PostHistory(target=target, prior=(), window=L)
    if key == 'author':
        stream_keys = [('author', target.author)]
    else:
        stream_keys = [('drug_stream', tag) for tag in target.sorted_tags]
    candidates: Dict[str, Post] = {}
    for stream_key in stream_keys:
        timestamps, posts = corpus._streams.get(stream_key, ([], []))
        cut = bisect.bisect_left(timestamps, target.timestamp)
        for post in posts[max(0, cut - L):cut]:
            candidates[post.id] = post
    prior = sorted(candidates.values(), key=lambda p: (p.timestamp, p.id))[-L:]
    return PostHistory(
        target=target,
        prior=tuple((p, target.timestamp - p.timestamp) for p in prior),
        window=L,
    )


def histories(corpus: Corpus, posts: Sequence[Post], L: int, key: str = 'author') -> List[PostHistory]:
    return [history(corpus, post, L, key) for post in posts]


def require_task_labels(posts: Sequence[Post], task: str) -> List[int]:
    """Class indices of posts for task; raises LabelError on a missing label."""
    labels = TASK_LABELS[task]
    indices = []
    for post in posts:
        value = post.label(task)
        if value is None:
            raise LabelError(f"post '{post.id}' has no {task} label")
        indices.append(labels.index(value))
    return indices
