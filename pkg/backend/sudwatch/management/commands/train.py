import numpy as np

from ...classifiers import evaluate_head, save_head, train_head
from ...corpus import SplitSpec, split
from ...labels import TASK_LABELS
from ...neural_core import PROB_FLOOR
from ...services.reports import (
    EXAMPLE_COLUMNS,
    PRF_COLUMNS,
    RUN_COLUMNS,
    example_rows,
    loss_rows,
    prf_rows,
    run_row,
    write_tsv,
)
from ...temporal import AblationVariant, predict_corpus, temporal_train
from ._base import D2SCommand


class Command(D2SCommand):
    help = 'Train a task head (sentiment, emotion, sud) or the history-aware SUD model.'

    def add_arguments(self, parser):
        parser.add_argument('--task', required=True, choices=list(TASK_LABELS))
        parser.add_argument('--corpus', help='labeled corpus (default: settings.D2S corpus_path)')
        parser.add_argument('--ontology', help='ontology used for entity masking')
        parser.add_argument(
            '--variant', default=AblationVariant.FULL.value, choices=[v.value for v in AblationVariant],
            help='sud: model variant to train',
        )
        parser.add_argument('--head-only', action='store_true', dest='head_only',
                            help='sud: train the single-post SUD head instead of the history-aware model')
        self.add_config_arguments(parser)
        self.add_model_arguments(parser)

    def handle(self, *args, **options):
        config = self.run_config(
            options, 'epochs', 'lr_head', 'lr_temporal', 'dropout', 'history_window', 'history_key',
            'attention', 'mask', 'time_feature', 'freeze_extractors',
        )
        corpus = self.load_corpus(options['corpus'] or config.corpus_path)
        ontology = self.load_ontology(options['ontology'] or config.ontology_path) if config.mask else None
        out = self.make_out(config.out_dir)
        task = options['task']

        if task != 'sud' or options['head_only']:
            train, dev, test = split(corpus, SplitSpec(seed=config.seed))
            head, report = train_head(
                train, dev, task, config.train_config(), config.dims(), masked=config.mask, ontology=ontology,
            )
            test_report, examples = evaluate_head(head, test, ontology)
            save_head(head, out / f'{task}_head.ckpt')
            write_tsv(out / f'{task}_head_metrics.tsv', PRF_COLUMNS, prf_rows(test_report, head.labels))
            write_tsv(out / f'{task}_head_predictions.tsv', EXAMPLE_COLUMNS, example_rows(examples))
            write_tsv(out / f'{task}_head_losses.tsv', ('epoch', 'loss'), loss_rows(report.epoch_losses))
            self.stdout.write(f'{task} head: best epoch {report.best_epoch}, test macro-F1 {test_report.macro_f1:.4f}')
            return

        variant = AblationVariant(options['variant'])
        model, report = temporal_train(
            corpus, ontology, variant, config.train_config(), config.dims(), config.temporal_options(),
        )
        labels = TASK_LABELS['sud']
        _, _, test = split(corpus, SplitSpec(seed=config.seed))
        test_ids = {post.id for post in test.posts}
        probs = predict_corpus(model, corpus)
        examples = []
        for post, row in zip(corpus.posts, probs):
            if post.id not in test_ids:
                continue
            gold = labels.index(post.sud_label)
            examples.append({
                'id': post.id,
                'gold': post.sud_label,
                'predicted': labels[int(row.argmax())],
                'loss': float(-np.log(max(row[gold], PROB_FLOOR))),
            })
        stem = f'sud_{variant.value}'
        write_tsv(out / f'{stem}_metrics.tsv', PRF_COLUMNS, prf_rows(report.test, labels))
        write_tsv(out / f'{stem}_runs.tsv', ('variant', 'run_seed') + RUN_COLUMNS,
                  [[variant.value, config.seed] + run_row(report.test)])
        write_tsv(out / f'{stem}_predictions.tsv', EXAMPLE_COLUMNS, example_rows(examples))
        write_tsv(out / f'{stem}_losses.tsv', ('epoch', 'loss'), loss_rows(report.epoch_losses))
        self.stdout.write(
            f'{variant.value}: best epoch {report.best_epoch}, test macro-F1 {report.test.macro_f1:.4f}'
        )
