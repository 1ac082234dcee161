from django.conf import settings

from ...corpus import tag_drugs
from ...services.reports import write_tsv
from ...topics import GROUP_BY, PERIODS, load_stopwords, tfidf_topics, topic_rows, topics_over_time
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Top-k TF-IDF n-grams per source or drug category, optionally per calendar period.'

    def add_arguments(self, parser):
        parser.add_argument('--corpus', required=True)
        parser.add_argument('--out', required=True, help='topics report file')
        parser.add_argument('--group-by', dest='group_by', choices=list(GROUP_BY), default='drug_category')
        parser.add_argument('--k', type=int, default=10)
        parser.add_argument('--period', choices=list(PERIODS), help='bin posts by UTC calendar period')
        parser.add_argument('--ontology', help='tags untagged corpora and masks drug mentions')
        parser.add_argument('--no-mask', action='store_true', dest='no_mask')
        parser.add_argument('--stopwords', help='stop-word list (default: settings.D2S stopwords_path)')
        parser.add_argument('--smooth-idf', action='store_true', dest='smooth_idf')

    def handle(self, *args, **options):
        corpus = self.load_corpus(options['corpus'])
        stopwords = load_stopwords(
            self.require_file(options['stopwords'] or settings.D2S['stopwords_path'], 'stop-word list')
        )
        needs_ontology = not options['no_mask'] or (options['group_by'] == 'drug_category' and not corpus.tagged)
        ontology = (
            self.load_ontology(options['ontology'] or settings.D2S['ontology_path']) if needs_ontology else None
        )
        if options['group_by'] == 'drug_category' and not corpus.tagged:
            corpus = tag_drugs(corpus, ontology)
        mask_with = None if options['no_mask'] else ontology

        if options['period']:
            tables = topics_over_time(
                corpus, options['period'], options['k'], options['group_by'],
                stopwords=stopwords, mask_with=mask_with, smooth_idf=options['smooth_idf'],
            ).values()
        else:
            tables = tfidf_topics(
                corpus, options['group_by'], options['k'],
                stopwords=stopwords, mask_with=mask_with, smooth_idf=options['smooth_idf'],
            )
        write_tsv(options['out'], ('group', 'period', 'rank', 'ngram', 'score'), topic_rows(tables))
