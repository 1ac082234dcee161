from pathlib import Path

from django.conf import settings

from ...labels import DrugCategory
from ...ontology_store import dump_ontology, export_lexicon, ontology_metrics
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Validate a drug ontology file, print its metrics, or export its crawl lexicon.'

    def add_arguments(self, parser):
        parser.add_argument('action', choices=['validate', 'stats', 'lexicon'])
        parser.add_argument('--path', help='ontology file (default: settings.D2S ontology_path)')
        parser.add_argument('--dump', help='stats: also write the parsed ontology back out to this path')
        parser.add_argument(
            '--categories', nargs='*', default=None,
            help='lexicon: DrugCategory values to export (default: all eight)',
        )
        parser.add_argument('--out', help='lexicon: write terms to this file instead of standard output')

    def handle(self, *args, **options):
        ontology = self.load_ontology(options['path'] or settings.D2S['ontology_path'])
        # category ambiguity is only detected when a concept is resolved
        for concept_id in ontology.concepts:
            ontology.category_of(concept_id)
        action = options['action']

        if action == 'validate':
            self.stdout.write('ok')
            return

        if action == 'stats':
            metrics = ontology_metrics(ontology)
            for name in ('concepts', 'lexicon_entries', 'relations', 'uncategorized'):
                self.stdout.write(f'{name}\t{getattr(metrics, name)}')
            if options['dump']:
                Path(options['dump']).parent.mkdir(parents=True, exist_ok=True)
                dump_ontology(ontology, options['dump'])
            return

        names = options['categories']
        categories = [DrugCategory(name) for name in names] if names else list(DrugCategory)
        terms = export_lexicon(ontology, categories)
        if options['out']:
            out = Path(options['out'])
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(''.join(f'{term}\n' for term in terms), encoding='utf-8')
        else:
            for term in terms:
                self.stdout.write(term)
