import json
import tempfile
from collections import Counter
from pathlib import Path

from django.test import SimpleTestCase

from ..synthetic import (
    CALM,
    DISTRESS,
    EMOTION_WORDS,
    PROTECTIVE_CUES,
    RISK_CUES,
    SynthConfig,
    generate_posts,
    planted_label,
    single_post_ceiling,
    synth_generate,
    write_manifest,
)
from .helpers import fixture_lexicon


class SynthConfigTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(ValueError):
            SynthConfig(n_authors=0)
        with self.assertRaises(ValueError):
            SynthConfig(signal='random')
        with self.assertRaises(ValueError):
            SynthConfig(noise=1.5)

    def test_planted_rule(self):
        text_only = SynthConfig(signal='text_only')
        self.assertEqual(planted_label(1, -1, text_only), 'SUDP')
        self.assertEqual(planted_label(-1, 1, text_only), 'SUDA')
        history = SynthConfig(history_weight=1.5)
        self.assertEqual(planted_label(-1, 1, history), 'SUDP')
        self.assertEqual(planted_label(1, -1, history), 'SUDA')
        self.assertEqual(planted_label(2, -1, history), 'SUDP')
        self.assertEqual(planted_label(-2, 1, history), 'SUDA')


class GenerationTests(SimpleTestCase):
    def setUp(self):
        self.config = SynthConfig(n_authors=15, posts_per_author=12, noise=0.0)

    def test_same_seed_same_corpus(self):
        first, manifest = synth_generate(self.config, seed=9)
        second, _ = synth_generate(self.config, seed=9)
        self.assertEqual(first, second)
        other, _ = synth_generate(self.config, seed=10)
        self.assertNotEqual(first, other)
        self.assertEqual(manifest['posts'], 15 * 12)
        self.assertEqual(sum(manifest['labels'].values()), 15 * 12)

    def test_posts_are_consistent_with_the_rule(self):
        items = generate_posts(self.config, seed=1)
        by_author = {}
        for item in items:
            words = item.post.text.split()
            risk = sum(1 for w in words if w in RISK_CUES)
            protective = sum(1 for w in words if w in PROTECTIVE_CUES)
            self.assertEqual(risk - protective, item.text_score)
            self.assertEqual(item.post.sud_label, planted_label(item.text_score, item.history_flag, self.config))
            earlier = by_author.setdefault(item.post.author, [])
            if earlier:
                self.assertGreater(item.post.timestamp, earlier[-1].post.timestamp)
            distress = any(e.post.emotion_label in {d.value for d in DISTRESS} for e in earlier[-self.config.window:])
            self.assertEqual(item.history_flag, 1 if distress else -1)
            earlier.append(item)

    def test_history_signal_caps_single_post_accuracy(self):
        items = generate_posts(self.config, seed=2)
        ceiling = single_post_ceiling(items)
        self.assertLess(ceiling, 1.0)
        text_only = generate_posts(SynthConfig(n_authors=15, posts_per_author=12, signal='text_only', noise=0.0), seed=2)
        self.assertEqual(single_post_ceiling(text_only), 1.0)

    def test_lexicon_fills_sentiment_labels(self):
        corpus, _ = synth_generate(self.config, seed=3, lexicon=fixture_lexicon())
        self.assertTrue(all(p.sentiment_label for p in corpus))
        unlabeled, _ = synth_generate(self.config, seed=3)
        self.assertTrue(all(p.sentiment_label is None for p in unlabeled))

    def test_noise_keeps_the_majority_emotion(self):
        distress_words = {w for e in DISTRESS for w in EMOTION_WORDS[e]}
        calm_words = {w for e in CALM for w in EMOTION_WORDS[e]}
        for noise, expected_other in ((0.0, 0), (1.0, 1)):
            config = SynthConfig(n_authors=15, posts_per_author=12, noise=noise)
            for item in generate_posts(config, seed=4):
                words = Counter(item.post.text.split())
                distress = sum(n for w, n in words.items() if w in distress_words)
                calm = sum(n for w, n in words.items() if w in calm_words)
                labelled_distress = item.post.emotion_label in {e.value for e in DISTRESS}
                same, other = (distress, calm) if labelled_distress else (calm, distress)
                self.assertEqual((same, other), (3 - expected_other, expected_other))

    def test_manifest_file(self):
        _, manifest = synth_generate(self.config, seed=5)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'nested' / 'manifest.json'
            write_manifest(manifest, path)
            loaded = json.loads(path.read_text())
        self.assertEqual(loaded['seed'], 5)
        self.assertEqual(loaded['config']['signal'], 'history_dependent')
        self.assertLess(loaded['single_post_ceiling'], 1.0)
