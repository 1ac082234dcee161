import json
from pathlib import Path

from ...corpus import write_corpus
from ...exceptions import ConfigError
from ...sentiment_rules import load_lexicon
from ...serializers import SynthConfigSerializer, first_error
from ...synthetic import SynthConfig, synth_generate, write_manifest
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Generate a labeled synthetic corpus with a planted SUD rule, plus its manifest.'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON file whose "synth" section holds the generator settings')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', required=True, help='corpus file to write')
        parser.add_argument('--manifest', help='manifest path (default: <out>.manifest.json)')
        parser.add_argument('--n-authors', type=int, dest='n_authors')
        parser.add_argument('--posts-per-author', type=int, dest='posts_per_author')
        parser.add_argument('--signal', choices=['history_dependent', 'text_only'])
        parser.add_argument('--noise', type=float)
        parser.add_argument('--lexicon', help='sentiment lexicon; when given, sentiment labels come from rule scoring')

    def handle(self, *args, **options):
        values = {
            'n_authors': 100, 'posts_per_author': 20, 'signal': 'history_dependent', 'noise': 0.1,
        }
        if options['config']:
            path = self.require_file(options['config'], 'synth config')
            try:
                values.update(json.loads(path.read_text(encoding='utf-8')).get('synth', {}))
            except (json.JSONDecodeError, AttributeError) as exc:
                raise ConfigError(f'{path}: expected a JSON object with a "synth" section') from exc
        for key in ('n_authors', 'posts_per_author', 'signal', 'noise'):
            if options[key] is not None:
                values[key] = options[key]
        serializer = SynthConfigSerializer(data=values)
        if not serializer.is_valid():
            raise ConfigError(f'invalid synth config: {first_error(serializer.errors)}')
        config = SynthConfig(**serializer.validated_data)

        lexicon = load_lexicon(self.require_file(options['lexicon'], 'lexicon')) if options['lexicon'] else None
        corpus, manifest = synth_generate(config, options['seed'], lexicon)
        out = Path(options['out'])
        write_corpus(corpus, out)
        write_manifest(manifest, options['manifest'] or out.with_name(out.name + '.manifest.json'))
        self.stdout.write(f"{len(corpus)} posts, single-post ceiling {manifest['single_post_ceiling']}")
