"""TF-IDF n-gram topics per group, optionally per calendar bin."""

import logging
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone as dt_timezone
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.feature_extraction.text import CountVectorizer

from .corpus import Corpus, Post, mask_entities
from .ontology_store import Ontology
from .text_utils import tokenize

logger = logging.getLogger(__name__)

GROUP_BY = ('source', 'drug_category')
PERIODS = ('year', 'quarter')


@dataclass(frozen=True)
class TopicTable:
    group: str
    terms: Tuple[Tuple[str, float], ...]
    k: int
    period: str = ''


def load_stopwords(path) -> FrozenSet[str]:
    words = set()
    with Path(path).open(encoding='utf-8') as handle:
        for line in handle:
            line = line.strip().lower()
            if line and not line.startswith('#'):
                words.add(line)
    return frozenset(words)


def ngram_analyzer(stopwords: FrozenSet[str], max_n: int = 3) -> Callable[[Sequence[str]], List[str]]:
    """Analyzer over a group document (a list of post texts); n-grams never cross posts.

    Stop words are dropped from unigrams only.
    """
    def analyze(texts: Sequence[str]) -> List[str]:
        grams = []
        for text in texts:
            tokens = tokenize(text)
            grams.extend(t for t in tokens if t not in stopwords)
            for n in range(2, max_n + 1):
                grams.extend(' '.join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
        return grams

    return analyze


def period_of(timestamp: int, period: str) -> str:
    moment = datetime.fromtimestamp(timestamp, tz=dt_timezone.utc)
    if period == 'year':
        return f'{moment.year}'
    return f'{moment.year}Q{(moment.month - 1) // 3 + 1}'


def _groups_of(post: Post, group_by: str) -> List[str]:
    if group_by == 'source':
        return [post.source]
    return [tag.value for tag in post.sorted_tags]


def tfidf_topics(
    corpus: Corpus,
    group_by: str,
    k: int,
    stopwords: FrozenSet[str] = frozenset(),
    mask_with: Optional[Ontology] = None,
    smooth_idf: bool = False,
    period: str = '',
) -> List[TopicTable]:
    """Top-k n-grams per group by tf * idf, idf = ln(N / df) over the N group documents.

    Ties are broken lexicographically. Terms present in every group score 0 and
    only appear when a group has fewer than k scoring terms.
    """
    if k < 1:
        raise ValueError('k must be >= 1.')
    if group_by not in GROUP_BY:
        raise ValueError(f"group_by must be one of: {', '.join(GROUP_BY)}.")
    documents: Dict[str, List[str]] = defaultdict(list)
    for post in corpus.posts:
        text = mask_entities(post, mask_with) if mask_with is not None else post.text
        for group in _groups_of(post, group_by):
            documents[group].append(text)
    names = sorted(documents)
    if not names:
        return []

    vectorizer = CountVectorizer(analyzer=ngram_analyzer(stopwords))
    try:
        counts = vectorizer.fit_transform([documents[name] for name in names]).tocsr()
    except ValueError:
        # every group document is empty of n-grams
        return [TopicTable(group=name, terms=(), k=k, period=period) for name in names]
    vocabulary = vectorizer.get_feature_names_out()
    n_groups = len(names)
    df = np.asarray((counts > 0).sum(axis=0)).ravel()
    if smooth_idf:
        idf = np.log((1.0 + n_groups) / (1.0 + df)) + 1.0
    else:
        idf = np.log(n_groups / df)

    tables = []
    for row, name in enumerate(names):
        start, end = counts.indptr[row], counts.indptr[row + 1]
        scored = [
            (str(vocabulary[col]), float(tf) * float(idf[col]))
            for col, tf in zip(counts.indices[start:end], counts.data[start:end])
        ]
        scored.sort(key=lambda item: (-item[1], item[0]))
        tables.append(TopicTable(group=name, terms=tuple(scored[:k]), k=k, period=period))
    return tables


def topics_over_time(
    corpus: Corpus,
    period: str,
    k: int,
    group_by: str = 'drug_category',
    stopwords: FrozenSet[str] = frozenset(),
    mask_with: Optional[Ontology] = None,
    smooth_idf: bool = False,
) -> Dict[Tuple[str, str], TopicTable]:
    """(group, period) -> TopicTable; tf-idf is computed within each UTC calendar bin."""
    if period not in PERIODS:
        raise ValueError(f"period must be one of: {', '.join(PERIODS)}.")
    bins: Dict[str, List[Post]] = defaultdict(list)
    for post in corpus.posts:
        bins[period_of(post.timestamp, period)].append(post)
    result = {}
    for label in sorted(bins):
        for table in tfidf_topics(
            corpus.with_posts(bins[label]), group_by, k,
            stopwords=stopwords, mask_with=mask_with, smooth_idf=smooth_idf, period=label,
        ):
            result[(table.group, label)] = table
    logger.info('topics over %d %s bins', len(bins), period)
    return result


def topic_rows(tables: Iterable[TopicTable]) -> List[List[str]]:
    rows = []
    for table in tables:
        for rank, (ngram, score) in enumerate(table.terms, start=1):
            rows.append([table.group, table.period or 'all', str(rank), ngram, f'{score:.6f}'])
    return rows
