import math

from django.test import SimpleTestCase

from ..labels import DrugCategory
from ..topics import load_stopwords, period_of, tfidf_topics, topic_rows, topics_over_time
from .helpers import STOPWORDS_PATH, corpus_of, fixture_ontology, make_post

JAN_2015 = 1420070400
APR_2015 = 1427846400
JUL_2015 = 1435708800
OCT_2015 = 1443657600


def scores(table):
    return dict(table.terms)


class TfidfTopicTests(SimpleTestCase):
    def setUp(self):
        self.corpus = corpus_of(
            make_post('1', source='r/a', text='zebra pills pills'),
            make_post('2', source='r/b', text='pills withdrawal'),
            make_post('3', source='r/c', text='pills withdrawal'),
        )

    def test_idf_of_a_term_in_one_of_three_groups(self):
        tables = {t.group: t for t in tfidf_topics(self.corpus, 'source', k=10)}
        self.assertEqual(sorted(tables), ['r/a', 'r/b', 'r/c'])
        a = scores(tables['r/a'])
        self.assertAlmostEqual(a['zebra'], math.log(3))
        self.assertAlmostEqual(a['zebra pills'], math.log(3))
        self.assertEqual(a['pills'], 0.0)
        self.assertAlmostEqual(scores(tables['r/b'])['withdrawal'], math.log(1.5))

    def test_ranking_is_non_increasing_with_lexicographic_ties(self):
        table = tfidf_topics(self.corpus, 'source', k=10)[0]
        values = [score for _, score in table.terms]
        self.assertEqual(values, sorted(values, reverse=True))
        self.assertEqual([term for term, _ in table.terms[:3]], ['pills pills', 'zebra', 'zebra pills'])
        self.assertEqual(table.terms[-1], ('pills', 0.0))
        self.assertEqual(len(tfidf_topics(self.corpus, 'source', k=2)[0].terms), 2)

    def test_order_invariance_and_doubling(self):
        base = tfidf_topics(self.corpus, 'source', k=10)
        reversed_corpus = corpus_of(*reversed(self.corpus.posts))
        self.assertEqual(tfidf_topics(reversed_corpus, 'source', k=10), base)
        doubled = corpus_of(*self.corpus.posts, *[
            make_post(p.id + 'x', source=p.source, text=p.text) for p in self.corpus.posts
        ])
        for single, double in zip(base, tfidf_topics(doubled, 'source', k=10)):
            for term, score in single.terms:
                self.assertAlmostEqual(scores(double)[term], 2 * score)

    def test_single_group_scores_zero(self):
        corpus = corpus_of(make_post('1', text='alpha beta'), make_post('2', text='beta gamma'))
        (table,) = tfidf_topics(corpus, 'source', k=5)
        self.assertTrue(all(score == 0.0 for _, score in table.terms))

    def test_stopwords_apply_to_unigrams_only(self):
        stopwords = load_stopwords(STOPWORDS_PATH)
        self.assertIn('the', stopwords)
        corpus = corpus_of(make_post('1', source='r/a', text='the dope'), make_post('2', source='r/b', text='nothing'))
        terms = scores(tfidf_topics(corpus, 'source', k=10, stopwords=stopwords)[0])
        self.assertNotIn('the', terms)
        self.assertIn('the dope', terms)

    def test_masking_and_drug_groups(self):
        corpus = corpus_of(
            make_post('1', text='smack again', tags={DrugCategory.HEROIN}),
            make_post('2', text='leaves again', tags={DrugCategory.KRATOM, DrugCategory.HEROIN}),
            make_post('3', text='tea', tags={DrugCategory.KRATOM}),
            tagged=True,
        )
        tables = {t.group: t for t in tfidf_topics(corpus, 'drug_category', k=10, mask_with=fixture_ontology())}
        self.assertEqual(sorted(tables), ['Heroin', 'Kratom'])
        heroin = scores(tables['Heroin'])
        self.assertIn('[DRUG_HEROIN]', heroin)
        self.assertNotIn('smack', heroin)

    def test_bad_arguments(self):
        with self.assertRaises(ValueError):
            tfidf_topics(self.corpus, 'source', k=0)
        with self.assertRaises(ValueError):
            tfidf_topics(self.corpus, 'vendor', k=3)
        with self.assertRaises(ValueError):
            topics_over_time(self.corpus, 'month', k=3)
        self.assertEqual(tfidf_topics(corpus_of(), 'source', k=3), [])


class TopicsOverTimeTests(SimpleTestCase):
    def test_year_boundary(self):
        self.assertEqual(period_of(1451606399, 'year'), '2015')
        self.assertEqual(period_of(1451606400, 'year'), '2016')

    def test_quarters(self):
        corpus = corpus_of(*[
            make_post(str(i), timestamp=ts, text=f'word{i}', tags={DrugCategory.OPIUM})
            for i, ts in enumerate((JAN_2015, APR_2015, JUL_2015, OCT_2015))
        ], tagged=True)
        result = topics_over_time(corpus, 'quarter', k=3)
        self.assertEqual(sorted(result), [('Opium', f'2015Q{q}') for q in range(1, 5)])
        yearly = topics_over_time(corpus, 'year', k=3)
        self.assertEqual(list(yearly), [('Opium', '2015')])

    def test_rows(self):
        corpus = corpus_of(make_post('1', source='r/a', text='zebra'), make_post('2', source='r/b', text='horse'))
        rows = topic_rows(tfidf_topics(corpus, 'source', k=1))
        self.assertEqual(rows[0], ['r/a', 'all', '1', 'zebra', f'{math.log(2):.6f}'])
        self.assertEqual(len(rows), 2)
