"""
Report writers and readers. Reports are UTF-8, tab-separated, one header line.
"""

import json
import logging
from decimal import Decimal
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

from ..exceptions import D2SInputError

logger = logging.getLogger(__name__)


def cell(value) -> str:
    if value is None:
        return '-'
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f'{value:.6f}'
    if isinstance(value, Decimal):
        return format(value, 'f')
    return str(value).replace('\t', ' ').replace('\n', ' ')


def write_tsv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        handle.write('\t'.join(header) + '\n')
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f'{path.name}: row has {len(row)} cells for {len(header)} columns.')
            handle.write('\t'.join(cell(v) for v in row) + '\n')
            count += 1
    logger.info('wrote %d rows to %s', count, path)
    return path


def write_jsonl(path, records: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + '\n')
    return path


def read_tsv(path) -> Tuple[List[str], List[Dict[str, str]]]:
    path = Path(path)
    if not path.is_file():
        raise D2SInputError(f'report not found: {path}')
    with path.open(encoding='utf-8') as handle:
        lines = [line.rstrip('\n') for line in handle if line.strip()]
    if not lines:
        raise D2SInputError(f'{path}: missing header line')
    header = lines[0].split('\t')
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        values = line.split('\t')
        if len(values) != len(header):
            raise D2SInputError(f'{path.name}: expected {len(header)} columns, got {len(values)}', line=line_no)
        rows.append(dict(zip(header, values)))
    return header, rows


def require_columns(path, header: Sequence[str], columns: Sequence[str]) -> None:
    missing = [c for c in columns if c not in header]
    if missing:
        raise D2SInputError(f"{Path(path).name}: missing column(s) {', '.join(missing)}")


def float_column(rows: Sequence[Dict[str, str]], column: str, path) -> List[float]:
    values = []
    for line_no, row in enumerate(rows, start=2):
        try:
            values.append(float(row[column]))
        except ValueError:
            raise D2SInputError(f"{Path(path).name}: column '{column}' holds '{row[column]}'", line=line_no) from None
    return values


PRF_COLUMNS = ('class', 'precision', 'recall', 'f1', 'support')
RUN_COLUMNS = ('precision', 'recall', 'macro_f1')
EXAMPLE_COLUMNS = ('id', 'gold', 'predicted', 'loss')


def prf_rows(report, labels: Sequence[str]) -> List[list]:
    """Per-class rows followed by a 'macro' row (support = total)."""
    rows = [[label, c.precision, c.recall, c.f1, c.support] for label, c in zip(labels, report.per_class)]
    total = sum(c.support for c in report.per_class)
    rows.append(['macro', report.macro_precision, report.macro_recall, report.macro_f1, total])
    return rows


def run_row(report) -> list:
    return [report.macro_precision, report.macro_recall, report.macro_f1]


def example_rows(examples: Iterable[dict]) -> List[list]:
    return [[e['id'], e['gold'], e['predicted'], e['loss']] for e in examples]


def loss_rows(losses: Sequence[float]) -> List[list]:
    return [[epoch, float(loss)] for epoch, loss in enumerate(losses, start=1)]
