from django.conf import settings

from ...corpus import write_corpus
from ...sentiment_rules import SentimentConstants, label_corpus, load_lexicon
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Fill sentiment labels on a corpus by rule-based valence scoring.'

    def add_arguments(self, parser):
        parser.add_argument('action', choices=['label'])
        parser.add_argument('--corpus', required=True)
        parser.add_argument('--lexicon', help='valence lexicon (default: settings.D2S lexicon_path)')
        parser.add_argument('--out', required=True, help='labeled corpus file')
        parser.add_argument('--pooling', choices=['sum', 'average'], default=settings.D2S['pooling'])

    def handle(self, *args, **options):
        corpus = self.load_corpus(options['corpus'])
        lexicon_path = self.require_file(options['lexicon'] or settings.D2S['lexicon_path'], 'lexicon')
        constants = SentimentConstants(pooling=options['pooling'])
        labeled = label_corpus(corpus, load_lexicon(lexicon_path, constants), constants)
        write_corpus(labeled, options['out'])
