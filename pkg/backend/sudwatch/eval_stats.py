"""Classification metrics, run medians, Wilcoxon signed-rank test, and agreement statistics."""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Hashable, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 25
ZERO_METHODS = ('wilcox', 'pratt')


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class PRFReport:
    per_class: Tuple[ClassMetrics, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float


@dataclass(frozen=True)
class WilcoxonResult:
    W: float
    n_effective: int
    p_value: float
    method: str


def confusion_matrix(actual: Sequence[int], predicted: Sequence[int], n_classes: int) -> np.ndarray:
    if len(actual) != len(predicted):
        raise ValueError(f'{len(actual)} actual labels but {len(predicted)} predictions.')
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(actual, dtype=np.int64), np.asarray(predicted, dtype=np.int64)), 1)
    return cm


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def prf(cm) -> PRFReport:
    """Per-class and macro precision/recall/F1. Zero denominators give 0."""
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] == 0:
        raise ValueError('confusion matrix must be square and non-empty.')
    if (cm < 0).any():
        raise ValueError('confusion matrix entries must be non-negative.')
    total = int(cm.sum())
    if total == 0:
        raise ValueError('confusion matrix is empty (total count 0).')
    per_class = []
    for k in range(cm.shape[0]):
        tp = int(cm[k, k])
        fp = int(cm[:, k].sum()) - tp
        fn = int(cm[k, :].sum()) - tp
        per_class.append(ClassMetrics(
            precision=_ratio(tp, tp + fp),
            recall=_ratio(tp, tp + fn),
            f1=_ratio(2 * tp, 2 * tp + fp + fn),
            support=tp + fn,
        ))
    n = len(per_class)
    return PRFReport(
        per_class=tuple(per_class),
        macro_precision=sum(c.precision for c in per_class) / n,
        macro_recall=sum(c.recall for c in per_class) / n,
        macro_f1=sum(c.f1 for c in per_class) / n,
        accuracy=int(np.trace(cm)) / total,
    )


def median_over_runs(values: Mapping[str, Sequence[float]]) -> Dict[str, float]:
    """metric -> median across runs (mean of the middle two for even counts)."""
    medians = {}
    for metric, runs in values.items():
        if not len(runs):
            raise ValueError(f"no runs recorded for metric '{metric}'.")
        medians[metric] = float(np.median(np.asarray(runs, dtype=np.float64)))
    return medians


def _signed_ranks(x: Sequence[float], y: Sequence[float], zero_method: str) -> Tuple[np.ndarray, np.ndarray]:
    """Ranks of |d| and signs of d for the pairs that count."""
    if len(x) != len(y):
        raise ValueError(f'paired samples differ in length: {len(x)} vs {len(y)}.')
    if not len(x):
        raise ValueError('wilcoxon_signed_rank needs at least one pair.')
    if zero_method not in ZERO_METHODS:
        raise ValueError(f"zero_method must be one of: {', '.join(ZERO_METHODS)}.")
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    if zero_method == 'wilcox':
        d = d[d != 0]
        ranks = rankdata(np.abs(d))
    else:
        ranks = rankdata(np.abs(d))
        keep = d != 0
        d, ranks = d[keep], ranks[keep]
    return ranks, np.sign(d)


def exact_rank_sum_counts(doubled_ranks: Sequence[int]) -> np.ndarray:
    """counts[s] = number of sign assignments whose doubled positive-rank sum is s."""
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float], zero_method: str = 'wilcox') -> WilcoxonResult:
    """Two-sided signed-rank test; exact null distribution for n <= 25, normal approximation above."""
    ranks, signs = _signed_ranks(x, y, zero_method)
    n = len(ranks)
    if n == 0:
        return WilcoxonResult(W=0.0, n_effective=0, p_value=1.0, method='exact')
    total = float(ranks.sum())
    w_plus = float(ranks[signs > 0].sum())
    W = min(w_plus, total - w_plus)

    if n <= EXACT_MAX_N:
        # average ranks are multiples of 1/2, so doubled ranks are integers
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = exact_rank_sum_counts(doubled)
        grand = int(doubled.sum())
        w2 = int(round(2 * W))
        sums = np.arange(grand + 1)
        extreme = np.minimum(sums, grand - sums) <= w2
        p = int(counts[extreme].sum()) / float(2 ** n)
        return WilcoxonResult(W=W, n_effective=n, p_value=min(1.0, p), method='exact')

    mean = total / 2.0
    sd = float(np.sqrt((ranks ** 2).sum() / 4.0))
    if sd == 0:
        return WilcoxonResult(W=W, n_effective=n, p_value=1.0, method='normal_approx')
    z = min(0.0, (W - mean + 0.5) / sd)
    p = 2.0 * float(norm.cdf(z))
    return WilcoxonResult(W=W, n_effective=n, p_value=min(1.0, p), method='normal_approx')


def cohen_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """Chance-corrected agreement of two raters. When expected agreement is 1, returns 1.0 on full agreement else 0.0."""
    if len(a) != len(b):
        raise ValueError(f'label lists differ in length: {len(a)} vs {len(b)}.')
    n = len(a)
    if n == 0:
        raise ValueError('cohen_kappa needs at least one item.')
    agree = sum(1 for x, y in zip(a, b) if x == y)
    ca, cb = Counter(a), Counter(b)
    chance = sum(ca[label] * cb[label] for label in ca)
    numerator = agree * n - chance
    denominator = n * n - chance
    if denominator == 0:
        return 1.0 if agree == n else 0.0
    return numerator / denominator


def kappa_from_table(table) -> float:
    """Cohen's kappa from a square agreement table (rows rater A, columns rater B)."""
    table = np.asarray(table, dtype=np.int64)
    n = int(table.sum())
    if n == 0:
        raise ValueError('agreement table is empty.')
    agree = int(np.trace(table))
    chance = int((table.sum(axis=1) * table.sum(axis=0)).sum())
    denominator = n * n - chance
    if denominator == 0:
        return 1.0 if agree == n else 0.0
    return (agree * n - chance) / denominator


def fleiss_kappa(table) -> float:
    """Fleiss' kappa; table[i][j] = raters assigning item i to category j, same rater count per item."""
    table = np.asarray(table, dtype=np.int64)
    if table.ndim != 2 or table.shape[0] == 0:
        raise ValueError('rating table must be a non-empty items x categories matrix.')
    raters = table.sum(axis=1)
    if (raters != raters[0]).any() or raters[0] < 2:
        raise ValueError('every item needs the same number (>= 2) of ratings.')
    N, m = table.shape[0], int(raters[0])
    per_item = ((table * table).sum(axis=1) - m) / (m * (m - 1))
    p_bar = float(per_item.mean())
    shares = table.sum(axis=0) / (N * m)
    p_e = float((shares * shares).sum())
    if p_e == 1.0:
        return 1.0 if p_bar == 1.0 else 0.0
    return (p_bar - p_e) / (1.0 - p_e)


def metric_columns(reports: Sequence[PRFReport]) -> Dict[str, List[float]]:
    return {
        'precision': [r.macro_precision for r in reports],
        'recall': [r.macro_recall for r in reports],
        'macro_f1': [r.macro_f1 for r in reports],
    }
