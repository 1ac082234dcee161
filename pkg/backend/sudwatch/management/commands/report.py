from django.conf import settings

from ...corpus import tag_drugs
from ...labels import TASK_LABELS
from ...services.reports import write_tsv
from ...services.timeseries import GROUPS, METRICS, label_timeseries, sentiment_stats
from ...topics import PERIODS
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Plot-ready tables: label counts over time per group, or per-category sentiment statistics.'

    def add_arguments(self, parser):
        parser.add_argument('action', choices=['timeseries', 'sentiment-stats'])
        parser.add_argument('--corpus', required=True)
        parser.add_argument('--ontology', help='used to tag drug categories when the corpus is untagged')
        parser.add_argument('--out', required=True, help='report file (timeseries) or directory (sentiment-stats)')
        parser.add_argument('--metric', choices=list(METRICS), default='sentiment')
        parser.add_argument('--group-by', dest='group_by', choices=list(GROUPS), default='drug')
        parser.add_argument('--period', choices=list(PERIODS), default='quarter')
        parser.add_argument('--per-stratum', type=int, default=100, dest='per_stratum')
        parser.add_argument('--seed', type=int, default=settings.D2S['seed'])

    def handle(self, *args, **options):
        corpus = self.load_corpus(options['corpus'])
        if not corpus.tagged and (options['group_by'] == 'drug' or options['action'] == 'sentiment-stats'):
            corpus = tag_drugs(corpus, self.load_ontology(options['ontology'] or settings.D2S['ontology_path']))

        if options['action'] == 'timeseries':
            rows = label_timeseries(corpus, options['metric'], options['period'], options['group_by'])
            write_tsv(options['out'], ('period', 'group', 'label', 'count'), rows)
            return

        out = self.make_out(options['out'])
        sentiment_rows, emotion_rows = sentiment_stats(corpus, options['per_stratum'], options['seed'])
        write_tsv(out / 'sentiment_stats.tsv', ('category',) + TASK_LABELS['sentiment'] + ('posts',), sentiment_rows)
        write_tsv(out / 'top_emotions.tsv', ('category', 'rank', 'emotion', 'count'), emotion_rows)
