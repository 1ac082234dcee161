import math
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from ..exceptions import LexiconFormatError
from ..sentiment_rules import (
    DEFAULT_CONSTANTS,
    SentimentLexicon,
    label_corpus,
    normalize_score,
    parse_lexicon,
    score_post,
    sentiment_tokens,
)
from .helpers import corpus_of, fixture_lexicon, make_post


class HandScoredTests(SimpleTestCase):
    def setUp(self):
        self.lexicon = fixture_lexicon()

    def test_empty_text_is_neutral(self):
        score = score_post('', self.lexicon)
        self.assertEqual(score.compound, 0.0)
        self.assertEqual(score.label, 'Neutral')

    def test_single_word(self):
        score = score_post('good', self.lexicon)
        self.assertAlmostEqual(score.compound, 1.9 / math.sqrt(1.9 ** 2 + 15), places=12)
        self.assertAlmostEqual(score.compound, 0.4404, delta=1e-4)
        self.assertEqual(score.label, 'Positive')

    def test_negation(self):
        score = score_post('not good', self.lexicon)
        self.assertAlmostEqual(score.compound, -0.3413, delta=1e-4)
        self.assertEqual(score.label, 'Negative')
        self.assertEqual(score.token_scores, [('good', -0.74 * 1.9)])

    def test_contraction_negates(self):
        self.assertLess(score_post("isn't good", self.lexicon).compound, 0)

    def test_booster_caps_and_exclamation(self):
        base = score_post('good day', self.lexicon).compound
        self.assertGreater(score_post('very good day', self.lexicon).compound, base)
        self.assertGreater(score_post('GOOD day', self.lexicon).compound, base)
        self.assertGreater(score_post('good day!!', self.lexicon).compound, base)
        # All-caps text gets no caps emphasis.
        self.assertAlmostEqual(score_post('GOOD', self.lexicon).compound, score_post('good', self.lexicon).compound)

    def test_exclamations_are_capped(self):
        three = score_post('good!!!', self.lexicon).compound
        self.assertAlmostEqual(score_post('good!!!!!!', self.lexicon).compound, three)

    def test_mask_tokens_are_ignored(self):
        self.assertEqual(sentiment_tokens('[DRUG_HEROIN] is good :)'), ['is', 'good', ':)'])
        self.assertAlmostEqual(
            score_post('[DRUG_HEROIN] good', self.lexicon).compound,
            score_post('good', self.lexicon).compound,
        )

    def test_average_pooling(self):
        constants = replace(DEFAULT_CONSTANTS, pooling='average')
        score = score_post('good good', self.lexicon, constants)
        self.assertAlmostEqual(score.compound, score_post('good', self.lexicon).compound)

    def test_normalize_is_bounded(self):
        self.assertLessEqual(normalize_score(1e9), 1.0)
        self.assertGreaterEqual(normalize_score(-1e9), -1.0)

    def test_label_corpus_overwrites(self):
        corpus = corpus_of(make_post('a', text='good', sentiment='Negative'), make_post('b', text='plain'))
        labelled = label_corpus(corpus, self.lexicon)
        self.assertEqual([p.sentiment_label for p in labelled], ['Positive', 'Neutral'])


class PropertyTests(SimpleTestCase):
    def setUp(self):
        lexicon = fixture_lexicon()
        plain = sorted(
            token for token in lexicon.valence
            if token not in lexicon.boosters and not lexicon.is_negation(token)
        )
        self.lexicon = lexicon
        self.words = plain
        self.positive = [t for t in plain if lexicon.valence[t] > 0]
        self.negative = [t for t in plain if lexicon.valence[t] < 0]
        self.rng = np.random.default_rng(11)

    def _text(self, vocabulary, extra=()):
        size = int(self.rng.integers(1, 8))
        words = list(self.rng.choice(vocabulary + list(extra), size=size))
        if self.rng.random() < 0.3:
            words[0] = words[0].upper()
        return ' '.join(words) + '!' * int(self.rng.integers(0, 5))

    def test_flipping_every_valence_flips_the_compound(self):
        mirrored = SentimentLexicon(
            valence={token: -value for token, value in self.lexicon.valence.items()},
            boosters=self.lexicon.boosters,
            negations=self.lexicon.negations,
        )
        extra = sorted(self.lexicon.boosters) + sorted(self.lexicon.negations) + ['today', 'it']
        for _ in range(1000):
            text = self._text(self.words, extra)
            self.assertAlmostEqual(
                score_post(text, mirrored).compound, -score_post(text, self.lexicon).compound, places=12,
            )

    def test_boosters_never_weaken_single_signed_text(self):
        for _ in range(1000):
            positive = self.rng.random() < 0.5
            text = self._text(self.positive if positive else self.negative).lower()
            words = text.split()
            at = int(self.rng.integers(0, len(words)))
            boosted = ' '.join(words[:at] + ['very'] + words[at:])
            before = score_post(text, self.lexicon).compound
            after = score_post(boosted, self.lexicon).compound
            if positive:
                self.assertGreaterEqual(after, before - 1e-12)
            else:
                self.assertLessEqual(after, before + 1e-12)


class LexiconFileTests(SimpleTestCase):
    def test_sections(self):
        lexicon = parse_lexicon(['good\t1.9\n', '[boosters]\n', 'very\t0.293\n', 'barely\t-0.293\n', '[negations]\n', 'never\n'])
        self.assertEqual(lexicon.valence, {'good': 1.9})
        self.assertEqual(lexicon.boosters, {'very': 0.293, 'barely': -0.293})
        self.assertIn('never', lexicon.negations)

    def test_valence_out_of_range(self):
        with self.assertRaises(LexiconFormatError) as ctx:
            parse_lexicon(['good\t1.9\n', 'awful\t-4.5\n'])
        self.assertEqual(ctx.exception.line, 2)

    def test_bad_booster_magnitude(self):
        with self.assertRaises(LexiconFormatError):
            parse_lexicon(['[boosters]\n', 'very\t0.5\n'])

    def test_non_numeric_value(self):
        with self.assertRaises(LexiconFormatError):
            parse_lexicon(['good\thigh\n'])
