"""
Plot-ready label tables: per-period label counts per group, and per-category
sentiment/emotion statistics over a stratified sample.
"""

from collections import Counter, defaultdict
from typing import Dict, List, Tuple

from ..corpus import Corpus, Post, stratified_sample
from ..labels import TASK_LABELS
from ..topics import PERIODS, period_of

METRICS = ('sentiment', 'emotion')
GROUPS = ('drug', 'source')
UNTAGGED = 'untagged'
TOP_EMOTIONS = 3


def _groups(post: Post, group_by: str) -> List[str]:
    if group_by == 'source':
        return [post.source]
    return [tag.value for tag in post.sorted_tags] or [UNTAGGED]


def label_timeseries(corpus: Corpus, metric: str, period: str = 'quarter', group_by: str = 'drug') -> List[list]:
    """Rows (period, group, label, count) for every label of the metric, zeros included.

    Unlabeled posts are skipped; a post with several drug tags counts once per tag.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of: {', '.join(METRICS)}.")
    if period not in PERIODS:
        raise ValueError(f"period must be one of: {', '.join(PERIODS)}.")
    if group_by not in GROUPS:
        raise ValueError(f"group_by must be one of: {', '.join(GROUPS)}.")
    counts: Dict[Tuple[str, str], Counter] = defaultdict(Counter)
    for post in corpus.posts:
        label = post.label(metric)
        if label is None:
            continue
        bucket = period_of(post.timestamp, period)
        for group in _groups(post, group_by):
            counts[(bucket, group)][label] += 1
    rows = []
    for bucket, group in sorted(counts):
        for label in TASK_LABELS[metric]:
            rows.append([bucket, group, label, counts[(bucket, group)][label]])
    return rows


def sentiment_stats(corpus: Corpus, per_stratum: int, seed: int) -> Tuple[List[list], List[list]]:
    """(category, Positive, Negative, Neutral, posts) rows and (category, rank, emotion, count) rows.

    Drawn from a drug-category stratified sample; emotion ties rank by label order.
    """
    sample = stratified_sample(corpus, per_stratum, 'drug_category', seed)
    sentiments: Dict[str, Counter] = defaultdict(Counter)
    emotions: Dict[str, Counter] = defaultdict(Counter)
    for post in sample.posts:
        for group in _groups(post, 'drug'):
            if post.sentiment_label is not None:
                sentiments[group][post.sentiment_label] += 1
            if post.emotion_label is not None:
                emotions[group][post.emotion_label] += 1
    sentiment_rows = [
        [group] + [sentiments[group][label] for label in TASK_LABELS['sentiment']] + [sum(sentiments[group].values())]
        for group in sorted(sentiments)
    ]
    order = {label: k for k, label in enumerate(TASK_LABELS['emotion'])}
    emotion_rows = []
    for group in sorted(emotions):
        ranked = sorted(emotions[group].items(), key=lambda item: (-item[1], order[item[0]]))
        for rank, (label, count) in enumerate(ranked[:TOP_EMOTIONS], start=1):
            emotion_rows.append([group, rank, label, count])
    return sentiment_rows, emotion_rows
