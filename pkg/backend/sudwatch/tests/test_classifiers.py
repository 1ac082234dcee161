import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from ..classifiers import (
    UNK_TOKEN,
    HeadModel,
    ModelDims,
    TrainConfig,
    Vocabulary,
    evaluate_head,
    extract_feature_vec,
    extract_features,
    head_loss,
    init_head,
    load_head,
    predict_head,
    save_head,
    train_head,
)
from ..exceptions import CheckpointError, LabelError, ShapeError
from ..labels import MASK_TOKENS
from ..neural_core import grad_check, save_checkpoint
from .helpers import corpus_of, fixture_ontology, make_post

SMALL = ModelDims(embed_dim=6, feature_dim=5, hidden_dim=3, attention_dim=3, dense_dim=4, history_window=2)
WORDS = {'Positive': 'great lovely', 'Negative': 'awful sad', 'Neutral': 'table chair'}


def toy_corpus(prefix, copies):
    posts = []
    for i in range(copies):
        for label, words in WORDS.items():
            posts.append(make_post(f'{prefix}{i}-{label}', text=f'{words} number {i}', sentiment=label))
    return corpus_of(*posts)


class VocabularyTests(SimpleTestCase):
    def test_reserved_tokens_come_first(self):
        vocabulary = Vocabulary.build(['Zebra apple', 'apple [DRUG_KRATOM]'])
        self.assertEqual(vocabulary.tokens[0], UNK_TOKEN)
        self.assertEqual(vocabulary.tokens[1:1 + len(MASK_TOKENS)], MASK_TOKENS)
        self.assertEqual(vocabulary.tokens[1 + len(MASK_TOKENS):], ('apple', 'zebra'))

    def test_unknown_tokens_map_to_zero(self):
        vocabulary = Vocabulary.build(['apple'])
        self.assertEqual(vocabulary.ids('apple pear'), [vocabulary.index['apple'], 0])


class HeadTrainingTests(SimpleTestCase):
    def setUp(self):
        self.train = toy_corpus('t', 8)
        self.dev = toy_corpus('d', 2)

    def test_separable_toy_is_learned(self):
        config = TrainConfig(epochs=30, lr_head=0.05, batch_head=8, dropout=0.0, seed=1)
        head, report = train_head(self.train, self.dev, 'sentiment', config, SMALL, masked=False)
        self.assertEqual(report.dev.macro_f1, 1.0)
        self.assertGreater(report.best_epoch, 0)
        self.assertLess(report.epoch_losses[-1], report.epoch_losses[0])
        probs = predict_head(head, ['great lovely'])
        self.assertEqual(head.labels[int(probs.argmax())], 'Positive')
        self.assertAlmostEqual(probs.sum(), 1.0)

    def test_zero_epochs_returns_the_initial_parameters(self):
        config = TrainConfig(epochs=0, seed=4)
        head, report = train_head(self.train, self.dev, 'sentiment', config, SMALL, masked=False)
        self.assertEqual(report.best_epoch, 0)
        self.assertEqual(report.epoch_losses, ())
        initial = init_head('sentiment', head.vocabulary, SMALL, 4)
        for name, value in initial.items():
            self.assertTrue(np.array_equal(head.params[name], value))

    def test_training_is_deterministic(self):
        config = TrainConfig(epochs=3, lr_head=0.01, batch_head=5, seed=2)
        first, _ = train_head(self.train, self.dev, 'sentiment', config, SMALL, masked=False)
        second, _ = train_head(self.train, self.dev, 'sentiment', config, SMALL, masked=False)
        for name in first.params:
            self.assertTrue(np.array_equal(first.params[name], second.params[name]))

    def test_missing_labels_and_empty_dev(self):
        config = TrainConfig(epochs=1)
        unlabeled = corpus_of(make_post('x', text='plain'))
        with self.assertRaises(LabelError):
            train_head(unlabeled, self.dev, 'sentiment', config, SMALL)
        with self.assertRaises(LabelError):
            train_head(self.train, corpus_of(), 'sentiment', config, SMALL)
        with self.assertRaises(LabelError):
            train_head(self.train, self.dev, 'mood', config, SMALL)

    def test_masked_texts_hide_drug_names(self):
        ontology = fixture_ontology()
        train = corpus_of(
            make_post('a', text='heroin again', sentiment='Negative'),
            make_post('b', text='lovely day', sentiment='Positive'),
        )
        head, _ = train_head(train, train, 'sentiment', TrainConfig(epochs=1), SMALL, ontology=ontology)
        self.assertNotIn('heroin', head.vocabulary.index)
        self.assertEqual(
            extract_feature_vec(train.posts[0], head, masked=True, ontology=ontology).tolist(),
            extract_feature_vec(
                make_post('c', text='[DRUG_HEROIN] again'), head, masked=True, ontology=ontology,
            ).tolist(),
        )


class HeadKernelTests(SimpleTestCase):
    def test_head_loss_gradient(self):
        vocabulary = Vocabulary.build(['great lovely day', 'awful sad day', 'table'])
        params = init_head('sentiment', vocabulary, SMALL, seed=3)
        pool = vocabulary.pool(['great day', 'awful sad', 'table table', 'unknown words'])
        labels = np.array([0, 1, 2, 2])

        def model_fn(values):
            return head_loss(values, pool, labels, mode='eval')

        self.assertLess(grad_check(model_fn, params, floor=1e-6), 1e-4)

    def test_feature_vec_is_non_negative(self):
        vocabulary = Vocabulary.build(['great day'])
        head = HeadModel('emotion', vocabulary, init_head('emotion', vocabulary, SMALL, seed=0), masked=False)
        vec = extract_feature_vec(make_post('a', text='great day'), head, masked=False)
        self.assertEqual(vec.shape, (SMALL.feature_dim,))
        self.assertTrue(np.all(vec >= 0))

    def test_batch_features_match_single_posts(self):
        vocabulary = Vocabulary.build(['great day', 'awful night'])
        head = HeadModel('emotion', vocabulary, init_head('emotion', vocabulary, SMALL, seed=4), masked=False)
        texts = ['great day', 'awful night', 'nothing known']
        rows = extract_features(texts, head)
        self.assertEqual(rows.shape, (3, SMALL.feature_dim))
        for i, text in enumerate(texts):
            single = extract_feature_vec(make_post(str(i), text=text), head, masked=False)
            self.assertTrue(np.allclose(rows[i], single, rtol=0, atol=1e-12))

    def test_shape_mismatch_is_rejected(self):
        vocabulary = Vocabulary.build(['great day'])
        params = init_head('sud', vocabulary, SMALL, seed=0)
        with self.assertRaises(ShapeError):
            HeadModel('sentiment', vocabulary, params)


class HeadCheckpointTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'sentiment_head.ckpt'

    def tearDown(self):
        self.tmp.cleanup()

    def test_save_load_keeps_tokens_with_commas(self):
        vocabulary = Vocabulary.build(['sold u-47,700 today', 'fine'])
        self.assertIn('u-47,700', vocabulary.index)
        head = HeadModel('sentiment', vocabulary, init_head('sentiment', vocabulary, SMALL, seed=5), masked=False)
        save_head(head, self.path)
        loaded = load_head(self.path)
        self.assertEqual(loaded.vocabulary.tokens, vocabulary.tokens)
        self.assertFalse(loaded.masked)
        texts = ['sold u-47,700 today', 'fine day']
        self.assertTrue(np.array_equal(predict_head(loaded, texts), predict_head(head, texts)))

    def test_evaluate_reports_examples(self):
        vocabulary = Vocabulary.build(['great', 'awful'])
        head = HeadModel('sentiment', vocabulary, init_head('sentiment', vocabulary, SMALL, seed=5), masked=False)
        corpus = corpus_of(make_post('a', text='great', sentiment='Positive'), make_post('b', text='awful', sentiment='Negative'))
        report, examples = evaluate_head(head, corpus)
        self.assertEqual([row['id'] for row in examples], ['a', 'b'])
        self.assertEqual([row['gold'] for row in examples], ['Positive', 'Negative'])
        self.assertTrue(all(row['loss'] > 0 for row in examples))
        self.assertGreaterEqual(report.accuracy, 0.0)

    def test_foreign_checkpoint_is_rejected(self):
        save_checkpoint(self.path, {'w': np.zeros(2)}, {'task': 'sentiment', 'vocab': 'a b'})
        with self.assertRaises(CheckpointError):
            load_head(self.path)
        save_checkpoint(self.path, {'w': np.zeros(2)})
        with self.assertRaises(CheckpointError):
            load_head(self.path)
