from django.conf import settings

from ...exceptions import ListingFormatError
from ...listing_parser import (
    RECORD_COLUMNS,
    category_shares,
    extract_listing,
    parse_scaled,
    read_listings,
    record_row,
    summarize_market,
)
from ...services.reports import write_jsonl, write_tsv
from ._base import D2SCommand

SUMMARY_COLUMNS = ('vendors', 'substances', 'locations', 'usd_total', 'listings', 'withdrawals')


class Command(D2SCommand):
    help = 'Extract structured records from marketplace listings and summarize the market.'

    def add_arguments(self, parser):
        parser.add_argument('--listings', required=True, help='listing TSV file')
        parser.add_argument('--ontology', help='ontology file (default: settings.D2S ontology_path)')
        parser.add_argument('--out', required=True, help='output directory')
        parser.add_argument('--withdrawals', help='market withdrawals in USD, reported in summary.tsv')

    def handle(self, *args, **options):
        ontology = self.load_ontology(options['ontology'] or settings.D2S['ontology_path'])
        rows = read_listings(self.require_file(options['listings'], 'listings'))
        withdrawals = None
        if options['withdrawals'] is not None:
            withdrawals = parse_scaled(options['withdrawals'])
            if withdrawals is None:
                raise ListingFormatError(f"--withdrawals '{options['withdrawals']}' is not a decimal amount")

        records = [extract_listing(raw, ontology) for _, raw, _ in rows]
        usd_values = [usd for _, _, usd in rows]
        summary = summarize_market(records, usd_values, withdrawals)

        out = self.make_out(options['out'])
        write_tsv(out / 'records.tsv', RECORD_COLUMNS, (record_row(r) for r in records))
        write_jsonl(out / 'diagnostics.jsonl', (
            {'line': line_no, 'product_name': record.product_name, 'diagnostics': list(record.diagnostics)}
            for (line_no, _, _), record in zip(rows, records)
        ))
        write_tsv(out / 'summary.tsv', SUMMARY_COLUMNS, [[getattr(summary, name) for name in SUMMARY_COLUMNS]])
        shares = category_shares(records, ontology)
        write_tsv(out / 'category_shares.tsv', ('category', 'share'), sorted(shares.items()))
        self.stdout.write(f'{len(records)} listings, {summary.vendors} vendors, {summary.substances} substances')
