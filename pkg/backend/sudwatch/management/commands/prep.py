from django.conf import settings

from ...corpus import SplitSpec, mask_corpus, split, stratified_sample, tag_drugs, write_corpus
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Corpus preparation: tag drug categories, mask drug entities, stratified sample, or split.'

    def add_arguments(self, parser):
        parser.add_argument('action', choices=['tag', 'mask', 'sample', 'split'])
        parser.add_argument('--corpus', required=True)
        parser.add_argument('--ontology', help='ontology file (default: settings.D2S ontology_path)')
        parser.add_argument('--out', required=True, help='corpus file (tag, mask, sample) or directory (split)')
        parser.add_argument('--per-stratum', type=int, default=100, dest='per_stratum')
        parser.add_argument(
            '--stratify-by', default='drug_category', dest='stratify_by',
            choices=['drug_category', 'sud_label', 'both'],
        )
        parser.add_argument('--ratios', default='75:5:20', help='train:dev:test percentages')
        parser.add_argument('--seed', type=int, default=settings.D2S['seed'])

    def handle(self, *args, **options):
        corpus = self.load_corpus(options['corpus'])
        action = options['action']

        if action in ('tag', 'mask'):
            ontology = self.load_ontology(options['ontology'] or settings.D2S['ontology_path'])
            if action == 'tag':
                corpus = tag_drugs(corpus, ontology)
            else:
                # tags must come from the surface forms, so tag first when needed
                if not corpus.tagged:
                    corpus = tag_drugs(corpus, ontology)
                corpus = mask_corpus(corpus, ontology)
            write_corpus(corpus, options['out'])
            return

        if action == 'sample':
            sample = stratified_sample(corpus, options['per_stratum'], options['stratify_by'], options['seed'])
            write_corpus(sample, options['out'])
            self.stdout.write(f'{len(sample)} of {len(corpus)} posts sampled')
            return

        try:
            train, dev, test = (int(part) for part in options['ratios'].split(':'))
        except ValueError:
            raise ValueError(f"--ratios must look like 75:5:20, got '{options['ratios']}'") from None
        parts = split(corpus, SplitSpec(train=train, dev=dev, test=test, seed=options['seed']))
        out = self.make_out(options['out'])
        for name, part in zip(('train', 'dev', 'test'), parts):
            write_corpus(part, out / f'{name}.tsv')
        self.stdout.write(' '.join(f'{name}={len(part)}' for name, part in zip(('train', 'dev', 'test'), parts)))
