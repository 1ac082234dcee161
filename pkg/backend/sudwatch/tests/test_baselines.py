import numpy as np
from django.test import SimpleTestCase

from ..baselines import (
    POS_BUCKETS,
    Baseline,
    _sequence_batches,
    _step_pool,
    attention_lstm_forward,
    attention_lstm_loss,
    baseline_runs,
    init_attention_lstm,
    init_rnn,
    pos_bucket,
    pos_counts,
    rnn_loss,
    rnn_probs,
    run_baseline,
    subword_embeddings,
)
from ..classifiers import ModelDims, TrainConfig
from ..exceptions import LabelError
from ..neural_core import grad_check
from ..synthetic import SynthConfig, synth_generate
from .helpers import corpus_of, make_post

SMALL = ModelDims(embed_dim=4, feature_dim=3, hidden_dim=3, attention_dim=3, dense_dim=4, history_window=2)
QUICK = TrainConfig(epochs=1, lr_temporal=0.01, batch_temporal=16, seed=2)


def one_post_per_author(n=40):
    posts = []
    for i in range(n):
        positive = i % 2 == 0
        posts.append(make_post(
            f'p{i:02d}', author=f'u{i:02d}', timestamp=i,
            text='craving again tonight' if positive else 'sober meeting tonight',
            sud='SUDP' if positive else 'SUDA',
        ))
    return corpus_of(*posts)


class PosBucketTests(SimpleTestCase):
    def test_buckets(self):
        cases = {
            'they': 'PRON', 'the': 'FUNC', '1.5': 'FUNC', 'was': 'VERB', 'running': 'VERB',
            'quickly': 'ADV', 'never': 'ADV', 'hopeless': 'ADJ', 'store': 'NOUN', '[DRUG_HEROIN]': 'NOUN',
        }
        for token, bucket in cases.items():
            self.assertEqual(pos_bucket(token), bucket, token)

    def test_counts(self):
        counts = pos_counts(['they were running home', ''])
        self.assertEqual(counts.shape, (2, len(POS_BUCKETS)))
        row = dict(zip(POS_BUCKETS, counts[0]))
        self.assertEqual(row, {'NOUN': 1, 'VERB': 2, 'ADJ': 0, 'ADV': 0, 'PRON': 1, 'FUNC': 0})
        self.assertEqual(counts[1].sum(), 0)


class BaselineKernelTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_subword_embeddings_are_deterministic_means(self):
        first = subword_embeddings(['heroin', 'heroine', ''], 5, seed=1)
        self.assertEqual(first.shape, (3, 5))
        self.assertTrue(np.array_equal(first, subword_embeddings(['heroin', 'heroine', ''], 5, seed=1)))
        self.assertTrue(np.array_equal(first[2], np.zeros(5)))
        self.assertFalse(np.array_equal(first, subword_embeddings(['heroin', 'heroine', ''], 5, seed=2)))

    def test_rnn_gradients(self):
        params = init_rnn(4, 3, seed=1)
        X = self.rng.normal(size=(3, 3, 4))
        lengths = np.array([3, 1, 2])
        labels = np.array([0, 1, 1])

        def model_fn(values):
            return rnn_loss(values, X, lengths, labels)

        self.assertLess(grad_check(model_fn, params, floor=1e-6), 1e-4)
        self.assertTrue(np.allclose(rnn_probs(params, X, lengths).sum(axis=1), 1.0))

    def test_rnn_ignores_steps_past_the_length(self):
        params = init_rnn(4, 3, seed=1)
        X = self.rng.normal(size=(1, 3, 4))
        short = rnn_probs(params, X, np.array([2]))
        X[0, 2] = 100.0
        self.assertTrue(np.array_equal(short, rnn_probs(params, X, np.array([2]))))

    def test_attention_lstm_gradients(self):
        params = init_attention_lstm(6, SMALL, seed=1)
        ids = [[1, 2], [3], [4, 5, 5], [0]]
        history_rows = [np.zeros(0, dtype=np.int64), np.array([0]), np.array([0, 1]), np.array([2])]
        rows = np.arange(4)
        seqs, lengths, mask = _sequence_batches(history_rows, rows)
        self.assertEqual(lengths.tolist(), [1, 2, 3, 2])
        pool = _step_pool(ids, seqs, mask.shape[1], 6)
        positive = np.array([1.0, 0.0, 1.0, 0.0])
        for scoring in ('additive', 'dot'):
            def model_fn(values, scoring=scoring):
                return attention_lstm_loss(values, pool, mask, positive, scoring)

            self.assertLess(grad_check(model_fn, params, floor=1e-6), 1e-4)
        probs, _ = attention_lstm_forward(params, pool, mask)
        self.assertTrue(np.all((probs > 0) & (probs < 1)))


class RunBaselineTests(SimpleTestCase):
    def test_lr_separates_text_only_labels(self):
        corpus, _ = synth_generate(SynthConfig(n_authors=20, posts_per_author=10, signal='text_only', noise=0.0), seed=5)
        report = run_baseline(corpus, Baseline.LR_POS_TFIDF, QUICK)
        self.assertEqual(report.test.accuracy, 1.0)
        self.assertIsNone(report.best_epoch)

    def test_recurrent_baselines_run_without_history(self):
        corpus = one_post_per_author()
        for baseline in (Baseline.H_RNN, Baseline.H_LSTM):
            report = run_baseline(corpus, baseline, QUICK, SMALL)
            self.assertIs(report.baseline, baseline)
            self.assertIn(report.best_epoch, (0, 1))
            self.assertTrue(0.0 <= report.test.macro_f1 <= 1.0)

    def test_single_class_training_split(self):
        posts = [make_post(f'p{i}', text='craving', sud='SUDP') for i in range(30)]
        with self.assertRaises(LabelError):
            run_baseline(corpus_of(*posts), Baseline.LR_POS_TFIDF, QUICK)

    def test_unknown_baseline_name(self):
        with self.assertRaises(ValueError):
            run_baseline(one_post_per_author(), 'SVM', QUICK)

    def test_one_report_per_seed(self):
        reports = baseline_runs(one_post_per_author(), ['LR_POS_TFIDF'], QUICK, seeds=[1, 2, 3])
        self.assertEqual([r.seed for r in reports[Baseline.LR_POS_TFIDF]], [1, 2, 3])
