"""Shared plumbing for the sudwatch management commands."""

import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from ...corpus import Corpus, ingest
from ...ontology_store import Ontology, load_ontology
from ...services.run_config import RunConfig, resolve_run_config

logger = logging.getLogger('sudwatch.commands')

INPUT_ERROR = 2


class D2SCommand(BaseCommand):
    """Input and validation errors, and missing upstream files, exit with status 2."""

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except CommandError:
            raise
        except FileNotFoundError as exc:
            raise CommandError(f'missing input: {exc.filename or exc}', returncode=INPUT_ERROR) from exc
        except ValueError as exc:
            raise CommandError(str(exc), returncode=INPUT_ERROR) from exc

    # ------------------------------------------------------------ arguments

    def add_config_arguments(self, parser):
        parser.add_argument('--config', help='JSON run config; its "run" section overrides settings.D2S')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', help='output directory')

    def add_model_arguments(self, parser):
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--lr-head', type=float, dest='lr_head')
        parser.add_argument('--lr-temporal', type=float, dest='lr_temporal')
        parser.add_argument('--dropout', type=float)
        parser.add_argument('--history-window', type=int, dest='history_window')
        parser.add_argument('--history-key', choices=['author', 'drug_stream'], dest='history_key')
        parser.add_argument('--attention', choices=['additive', 'dot'])
        parser.add_argument('--no-mask', action='store_const', const=False, dest='mask')
        parser.add_argument('--no-time-feature', action='store_const', const=False, dest='time_feature')
        parser.add_argument('--joint-extractors', action='store_const', const=False, dest='freeze_extractors')

    # ------------------------------------------------------------ helpers

    def run_config(self, options, *keys) -> RunConfig:
        """Resolve the RunConfig from --config plus the named option keys."""
        overrides = {key: options.get(key) for key in keys}
        overrides['seed'] = options.get('seed')
        overrides['out_dir'] = options.get('out')
        return resolve_run_config(options.get('config'), overrides)

    def require_file(self, path, what: str) -> Path:
        if not path:
            raise CommandError(f'{what} path is required', returncode=INPUT_ERROR)
        path = Path(path)
        if not path.is_file():
            raise CommandError(f'{what} not found: {path}', returncode=INPUT_ERROR)
        return path

    def load_corpus(self, path) -> Corpus:
        return ingest(self.require_file(path, 'corpus'))

    def load_ontology(self, path) -> Ontology:
        return load_ontology(self.require_file(path, 'ontology'))

    def make_out(self, path) -> Path:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        return path
