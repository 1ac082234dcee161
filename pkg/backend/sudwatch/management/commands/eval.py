from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ...classifiers import evaluate_head, load_head
from ...eval_stats import cohen_kappa, fleiss_kappa, wilcoxon_signed_rank
from ...exceptions import D2SInputError
from ...services.reports import (
    EXAMPLE_COLUMNS,
    PRF_COLUMNS,
    example_rows,
    float_column,
    prf_rows,
    read_tsv,
    require_columns,
    write_tsv,
)
from ._base import D2SCommand

PAIR_KEYS = {'runs': 'run_seed', 'examples': 'id'}
DEFAULT_COLUMNS = {'runs': 'macro_f1', 'examples': 'loss'}


def parse_where(text: Optional[str]) -> Dict[str, str]:
    """'variant=Full,baseline=H_LSTM' -> {'variant': 'Full', 'baseline': 'H_LSTM'}."""
    if not text:
        return {}
    filters = {}
    for part in text.split(','):
        key, sep, value = part.partition('=')
        if not sep or not key.strip():
            raise D2SInputError(f"filter '{part}' must look like column=value")
        filters[key.strip()] = value.strip()
    return filters


def paired_column(path, column: str, key: str, where: Dict[str, str]) -> Dict[str, float]:
    header, rows = read_tsv(path)
    require_columns(path, header, [column, key, *where])
    rows = [row for row in rows if all(row[k] == v for k, v in where.items())]
    values = dict(zip((row[key] for row in rows), float_column(rows, column, path)))
    if len(values) != len(rows):
        raise D2SInputError(f"{Path(path).name}: '{key}' values repeat after filtering")
    return values


def read_labels(path, column: str) -> Dict[str, str]:
    header, rows = read_tsv(path)
    require_columns(path, header, ['id', column])
    labels = {row['id']: row[column] for row in rows}
    if len(labels) != len(rows):
        raise D2SInputError(f"{Path(path).name}: duplicate ids")
    return labels


class Command(D2SCommand):
    help = 'Evaluate a saved head, compare two result files (Wilcoxon), or measure label agreement (kappa).'

    def add_arguments(self, parser):
        parser.add_argument('action', choices=['model', 'wilcoxon', 'kappa'])
        parser.add_argument('--out', help='directory (model) or report file (wilcoxon, kappa)')
        # model
        parser.add_argument('--checkpoint')
        parser.add_argument('--corpus')
        parser.add_argument('--ontology', help='model: ontology for masking raw text')
        # wilcoxon
        parser.add_argument('--a', help='first result file')
        parser.add_argument('--b', help='second result file (default: same as --a)')
        parser.add_argument('--pairing', choices=list(PAIR_KEYS))
        parser.add_argument('--column', help='compared column (runs: macro_f1, examples: loss)')
        parser.add_argument('--a-where', dest='a_where', help='row filter for --a, e.g. variant=Full')
        parser.add_argument('--b-where', dest='b_where', help='row filter for --b, e.g. variant=NoHistory')
        parser.add_argument('--zero-method', dest='zero_method', choices=['wilcox', 'pratt'], default='wilcox')
        # kappa
        parser.add_argument('--labels', nargs='+', help='two label files (Cohen) or three and more (Fleiss)')
        parser.add_argument('--label-column', dest='label_column', default='label')

    def handle(self, *args, **options):
        getattr(self, f"handle_{options['action']}")(options)

    def handle_model(self, options):
        head = load_head(self.require_file(options['checkpoint'], 'checkpoint'))
        corpus = self.load_corpus(options['corpus'])
        ontology = self.load_ontology(options['ontology']) if options['ontology'] else None
        report, examples = evaluate_head(head, corpus, ontology)
        out = self.make_out(options['out'] or '.')
        write_tsv(out / f'{head.task}_eval_metrics.tsv', PRF_COLUMNS, prf_rows(report, head.labels))
        write_tsv(out / f'{head.task}_eval_predictions.tsv', EXAMPLE_COLUMNS, example_rows(examples))
        self.stdout.write(f'{head.task}: macro-F1 {report.macro_f1:.4f}, accuracy {report.accuracy:.4f}')

    def handle_wilcoxon(self, options):
        if not options['pairing']:
            raise D2SInputError('--pairing runs|examples is required')
        a_path = self.require_file(options['a'], 'result file')
        b_path = self.require_file(options['b'], 'result file') if options['b'] else a_path
        pairing = options['pairing']
        column = options['column'] or DEFAULT_COLUMNS[pairing]
        key = PAIR_KEYS[pairing]
        a = paired_column(a_path, column, key, parse_where(options['a_where']))
        b = paired_column(b_path, column, key, parse_where(options['b_where']))
        if set(a) != set(b):
            only = sorted(set(a) ^ set(b))
            raise D2SInputError(f"the two samples pair up on different '{key}' values, e.g. '{only[0]}'")
        keys = sorted(a)
        result = wilcoxon_signed_rank([a[k] for k in keys], [b[k] for k in keys], options['zero_method'])
        rows = [[column, pairing, len(keys), result.n_effective, result.W, result.p_value, result.method]]
        header = ('column', 'pairing', 'pairs', 'n_effective', 'W', 'p_value', 'method')
        if options['out']:
            write_tsv(options['out'], header, rows)
        self.stdout.write(f'W={result.W:g} n={result.n_effective} p={result.p_value:.6g} ({result.method})')

    def handle_kappa(self, options):
        paths = options['labels'] or []
        if len(paths) < 2:
            raise D2SInputError('--labels needs at least two label files')
        raters = [read_labels(self.require_file(p, 'label file'), options['label_column']) for p in paths]
        ids = sorted(raters[0])
        for path, rater in zip(paths[1:], raters[1:]):
            if set(rater) != set(ids):
                raise D2SInputError(f'{Path(path).name}: labels cover different ids than {Path(paths[0]).name}')
        if len(raters) == 2:
            kind, value = 'cohen', cohen_kappa([raters[0][i] for i in ids], [raters[1][i] for i in ids])
        else:
            kind, value = 'fleiss', fleiss_kappa(rating_table(raters, ids))
        if options['out']:
            write_tsv(options['out'], ('statistic', 'raters', 'items', 'kappa'), [[kind, len(raters), len(ids), value]])
        self.stdout.write(f'{kind} kappa {value:.6f} over {len(ids)} items')


def rating_table(raters: List[Dict[str, str]], ids: List[str]) -> np.ndarray:
    categories = sorted({label for rater in raters for label in rater.values()})
    column = {label: j for j, label in enumerate(categories)}
    table = np.zeros((len(ids), len(categories)), dtype=np.int64)
    for i, item in enumerate(ids):
        for rater in raters:
            table[i, column[rater[item]]] += 1
    return table
