from ...baselines import Baseline, baseline_runs
from ...eval_stats import median_over_runs, metric_columns
from ...services.reports import RUN_COLUMNS, run_row, write_tsv
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Train comparison baselines once per seed and report their test metrics and medians.'

    def add_arguments(self, parser):
        parser.add_argument('--name', nargs='+', required=True, choices=[b.value for b in Baseline])
        parser.add_argument('--runs', type=int, default=1)
        parser.add_argument('--corpus', help='labeled corpus (default: settings.D2S corpus_path)')
        parser.add_argument('--ontology', help='ontology used for entity masking')
        self.add_config_arguments(parser)
        self.add_model_arguments(parser)

    def handle(self, *args, **options):
        config = self.run_config(
            options, 'epochs', 'lr_head', 'lr_temporal', 'dropout', 'history_window', 'history_key',
            'attention', 'mask', 'time_feature', 'freeze_extractors',
        )
        corpus = self.load_corpus(options['corpus'] or config.corpus_path)
        ontology = self.load_ontology(options['ontology'] or config.ontology_path) if config.mask else None
        reports = baseline_runs(
            corpus, options['name'], config.train_config(), config.run_seeds(options['runs']),
            config.dims(), config.temporal_options(), ontology,
        )
        out = self.make_out(config.out_dir)
        write_tsv(out / 'baseline_runs.tsv', ('baseline', 'run_seed') + RUN_COLUMNS, (
            [baseline.value, report.seed] + run_row(report.test)
            for baseline, runs in reports.items() for report in runs
        ))
        summary = []
        for baseline, runs in reports.items():
            medians = median_over_runs(metric_columns([r.test for r in runs]))
            summary.append([baseline.value, len(runs)] + [medians[c] for c in RUN_COLUMNS])
            self.stdout.write(f"{baseline.value}\tmedian macro-F1 {medians['macro_f1']:.4f}")
        write_tsv(out / 'baseline_summary.tsv', ('baseline', 'runs') + RUN_COLUMNS, summary)
