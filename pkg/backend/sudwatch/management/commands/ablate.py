from ...services.reports import RUN_COLUMNS, run_row, write_tsv
from ...temporal import AblationVariant, ablation_report
from ...text_utils import MASK_RE
from ._base import D2SCommand, logger

SUMMARY_COLUMNS = (
    'variant', 'runs', 'precision', 'recall', 'macro_f1',
    'delta_precision', 'delta_recall', 'delta_macro_f1',
)


class Command(D2SCommand):
    help = 'Train every ablation variant once per seed and report medians with deltas against Full.'

    def add_arguments(self, parser):
        parser.add_argument('--runs', type=int, default=1)
        parser.add_argument('--corpus', help='labeled corpus (default: settings.D2S corpus_path)')
        parser.add_argument('--ontology', help='ontology used for entity masking')
        parser.add_argument(
            '--variants', nargs='+', default=[v.value for v in AblationVariant],
            choices=[v.value for v in AblationVariant],
        )
        parser.add_argument('--jobs', type=int, help='worker processes, one seed per worker')
        self.add_config_arguments(parser)
        self.add_model_arguments(parser)

    def handle(self, *args, **options):
        config = self.run_config(
            options, 'epochs', 'lr_head', 'lr_temporal', 'dropout', 'history_window', 'history_key',
            'attention', 'mask', 'time_feature', 'freeze_extractors', 'jobs',
        )
        corpus = self.load_corpus(options['corpus'] or config.corpus_path)
        if any(MASK_RE.search(post.text) for post in corpus.posts):
            logger.warning('corpus already holds mask tokens; NoEntityMasking will not see raw drug names')
        ontology = self.load_ontology(options['ontology'] or config.ontology_path)
        variants = [AblationVariant(v) for v in options['variants']]
        if AblationVariant.FULL not in variants:
            variants.insert(0, AblationVariant.FULL)

        runs, summaries = ablation_report(
            corpus, ontology, config.train_config(),
            runs=options['runs'], seeds=config.run_seeds(options['runs']),
            dims=config.dims(), options=config.temporal_options(), variants=variants, jobs=config.jobs,
        )
        out = self.make_out(config.out_dir)
        order = {variant: k for k, variant in enumerate(variants)}
        runs = sorted(runs, key=lambda run: (order[run.variant], run.seed))
        write_tsv(out / 'ablation_runs.tsv', ('variant', 'run_seed') + RUN_COLUMNS,
                  ([run.variant.value, run.seed] + run_row(run.report) for run in runs))
        write_tsv(out / 'ablation_summary.tsv', SUMMARY_COLUMNS, (
            [s.variant.value, s.runs, s.precision, s.recall, s.macro_f1,
             s.delta_precision, s.delta_recall, s.delta_macro_f1]
            for s in summaries
        ))
        for s in summaries:
            self.stdout.write(f'{s.variant.value}\tmacro-F1 {s.macro_f1:.4f}\tdelta {s.delta_macro_f1:+.4f}')
