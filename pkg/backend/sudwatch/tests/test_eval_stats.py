import itertools

import numpy as np
from django.test import SimpleTestCase
from scipy.stats import rankdata, wilcoxon
from sklearn.metrics import cohen_kappa_score, precision_recall_fscore_support

from ..eval_stats import (
    cohen_kappa,
    confusion_matrix,
    exact_rank_sum_counts,
    fleiss_kappa,
    kappa_from_table,
    median_over_runs,
    metric_columns,
    prf,
    wilcoxon_signed_rank,
)

FLEISS_EXAMPLE = [
    [0, 0, 0, 0, 14],
    [0, 2, 6, 4, 2],
    [0, 0, 3, 5, 6],
    [0, 3, 9, 2, 0],
    [2, 2, 8, 1, 1],
    [7, 7, 0, 0, 0],
    [3, 2, 6, 3, 0],
    [2, 5, 3, 2, 2],
    [6, 5, 2, 1, 0],
    [0, 2, 2, 3, 7],
]


def brute_force_p(d):
    """Two-sided p by enumerating every sign assignment of the ranks."""
    d = np.asarray([v for v in d if v != 0], dtype=float)
    n = len(d)
    ranks = rankdata(np.abs(d))
    total = ranks.sum()
    w_plus = ranks[d > 0].sum()
    observed = min(w_plus, total - w_plus)
    hits = 0
    for signs in itertools.product((0, 1), repeat=n):
        s = sum(r for r, positive in zip(ranks, signs) if positive)
        if min(s, total - s) <= observed + 1e-9:
            hits += 1
    return hits / 2 ** n


class PRFTests(SimpleTestCase):
    def test_symmetric_table(self):
        report = prf([[8, 2], [2, 8]])
        self.assertEqual(report.macro_f1, 0.8)
        self.assertEqual(report.accuracy, 0.8)
        self.assertEqual([c.support for c in report.per_class], [10, 10])

    def test_zero_denominators(self):
        report = prf([[5, 0], [5, 0]])
        self.assertEqual(report.per_class[1].precision, 0.0)
        self.assertEqual(report.per_class[1].f1, 0.0)
        self.assertEqual(report.per_class[0].recall, 1.0)

    def test_matches_sklearn(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            actual = rng.integers(0, 3, size=40)
            predicted = rng.integers(0, 3, size=40)
            report = prf(confusion_matrix(actual, predicted, 3))
            p, r, f, _ = precision_recall_fscore_support(
                actual, predicted, labels=[0, 1, 2], average='macro', zero_division=0,
            )
            self.assertAlmostEqual(report.macro_precision, p, places=12)
            self.assertAlmostEqual(report.macro_recall, r, places=12)
            self.assertAlmostEqual(report.macro_f1, f, places=12)

    def test_bad_tables(self):
        for table in ([[1, 2, 3]], [[0, 0], [0, 0]], [[1, -1], [0, 1]]):
            with self.assertRaises(ValueError):
                prf(table)
        with self.assertRaises(ValueError):
            confusion_matrix([0, 1], [0], 2)


class MedianTests(SimpleTestCase):
    def test_odd_and_even(self):
        self.assertEqual(median_over_runs({'f1': [3, 1, 2]}), {'f1': 2.0})
        self.assertEqual(median_over_runs({'f1': [4, 1, 2, 3]}), {'f1': 2.5})
        with self.assertRaises(ValueError):
            median_over_runs({'f1': []})

    def test_metric_columns(self):
        columns = metric_columns([prf([[8, 2], [2, 8]]), prf([[10, 0], [0, 10]])])
        self.assertEqual(columns['macro_f1'], [0.8, 1.0])


class WilcoxonTests(SimpleTestCase):
    def test_five_positive_differences(self):
        result = wilcoxon_signed_rank([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
        self.assertEqual(result.p_value, 0.0625)
        self.assertEqual(result.W, 0.0)
        self.assertEqual(result.method, 'exact')

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            n = int(rng.integers(1, 13))
            # small integer range so ties are common
            d = rng.integers(-4, 5, size=n)
            if not d.any():
                d[0] = 1
            result = wilcoxon_signed_rank(d, np.zeros(n))
            self.assertAlmostEqual(result.p_value, brute_force_p(d), delta=1e-9)
            self.assertEqual(result.n_effective, int((d != 0).sum()))

    def test_matches_scipy_without_ties(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(5, 13))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            ours = wilcoxon_signed_rank(x, y)
            theirs = wilcoxon(x, y)
            self.assertAlmostEqual(ours.p_value, float(theirs.pvalue), places=12)
            self.assertAlmostEqual(ours.W, float(theirs.statistic), places=12)

    def test_zero_differences(self):
        self.assertEqual(wilcoxon_signed_rank([1, 2], [1, 2]).p_value, 1.0)
        pratt = wilcoxon_signed_rank([0, 1, 2], [0, 0, 0], zero_method='pratt')
        self.assertEqual((pratt.W, pratt.n_effective), (0.0, 2))
        with self.assertRaises(ValueError):
            wilcoxon_signed_rank([1], [1], zero_method='zsplit')

    def test_large_samples_use_the_normal_approximation(self):
        x = np.arange(1, 41, dtype=float)
        result = wilcoxon_signed_rank(x, np.zeros(40))
        self.assertEqual(result.method, 'normal_approx')
        self.assertLess(result.p_value, 1e-6)

    def test_bad_input(self):
        with self.assertRaises(ValueError):
            wilcoxon_signed_rank([1, 2], [1])
        with self.assertRaises(ValueError):
            wilcoxon_signed_rank([], [])

    def test_rank_sum_counts(self):
        self.assertEqual(exact_rank_sum_counts([2, 4]).tolist(), [1, 0, 1, 0, 1, 0, 1])


class KappaTests(SimpleTestCase):
    def test_table(self):
        self.assertAlmostEqual(kappa_from_table([[40, 10], [5, 45]]), 0.7, delta=1e-12)

    def test_labels_match_table_and_sklearn(self):
        a = ['y'] * 40 + ['y'] * 10 + ['n'] * 5 + ['n'] * 45
        b = ['y'] * 40 + ['n'] * 10 + ['y'] * 5 + ['n'] * 45
        self.assertAlmostEqual(cohen_kappa(a, b), 0.7, delta=1e-12)
        rng = np.random.default_rng(3)
        for _ in range(30):
            a = list(rng.choice(['p', 'q', 'r'], size=30))
            b = list(rng.choice(['p', 'q', 'r'], size=30))
            self.assertAlmostEqual(cohen_kappa(a, b), cohen_kappa_score(a, b), places=12)

    def test_degenerate_agreement(self):
        self.assertEqual(cohen_kappa(['a', 'a'], ['a', 'a']), 1.0)
        with self.assertRaises(ValueError):
            cohen_kappa(['a'], ['a', 'b'])
        with self.assertRaises(ValueError):
            cohen_kappa([], [])

    def test_fleiss(self):
        self.assertAlmostEqual(fleiss_kappa(FLEISS_EXAMPLE), 0.20993, places=5)
        self.assertEqual(fleiss_kappa([[3, 0], [3, 0]]), 1.0)
        with self.assertRaises(ValueError):
            fleiss_kappa([[2, 1], [1, 1]])
