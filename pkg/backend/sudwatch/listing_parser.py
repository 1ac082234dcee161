"""
Marketplace listing extraction.

A raw listing is one tab-separated line:
    market, captured_at, title, description, vendor, price_text, ship_from_text, ship_to_text[, usd_value]

Substances come from the ontology gazetteer, numbers from regular expressions:
- quantity = first <number><unit> in the title, dosage = first in the description
- units must resolve to a dosage_unit concept
- prices: "BTC <n>", "$<n>", "<n> USD"
Amounts are exact integers scaled by 1e8.
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .exceptions import ListingFormatError
from .labels import NOVEL_SYNTHETIC_OPIOID, UNCATEGORIZED, UNCATEGORIZED_SHARE
from .ontology_store import Ontology, find_drug_mentions
from .serializers import RawListingSerializer, first_error

logger = logging.getLogger(__name__)

SCALE_DIGITS = 8
SCALE = 10 ** SCALE_DIGITS
NSO_CLASS_ID = 'novel_synthetic_opioid'

LISTING_FIELDS = (
    'market', 'captured_at', 'title', 'description', 'vendor',
    'price_text', 'ship_from_text', 'ship_to_text',
)

_NUMBER = r'\d+(?:\.\d+)?'
_AMOUNT_UNIT_RE = re.compile(r'(?<![\w.,-])(' + _NUMBER + r')\s*([A-Za-z]+)')
_PRICE_NUMBER = r'\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?'
_PRICE_PATTERNS = (
    ('BTC', re.compile(r'\bBTC\s*(' + _PRICE_NUMBER + r')', re.IGNORECASE)),
    ('USD', re.compile(r'\$\s*(' + _PRICE_NUMBER + r')')),
    ('USD', re.compile(r'(' + _PRICE_NUMBER + r')\s*USD\b', re.IGNORECASE)),
)
_DECIMAL_RE = re.compile(r'^(\d+)(?:\.(\d{1,%d}))?$' % SCALE_DIGITS)


def parse_scaled(text: str) -> Optional[int]:
    """'0.0444' -> 4440000. None when the text is not a plain decimal with <= 8 fractional digits."""
    match = _DECIMAL_RE.match((text or '').replace(',', ''))
    if match is None:
        return None
    whole, frac = match.group(1), match.group(2) or ''
    return int(whole) * SCALE + int(frac.ljust(SCALE_DIGITS, '0'))


def format_scaled(value: int) -> str:
    whole, frac = divmod(value, SCALE)
    if not frac:
        return str(whole)
    return f'{whole}.' + str(frac).rjust(SCALE_DIGITS, '0').rstrip('0')


@dataclass(frozen=True)
class Measure:
    """A positive amount with a unit (dosage or quantity)."""
    scaled: int
    unit: str

    @property
    def amount(self) -> Decimal:
        return Decimal(format_scaled(self.scaled))

    def __str__(self) -> str:
        return f'{format_scaled(self.scaled)} {self.unit}'


@dataclass(frozen=True)
class Price:
    currency: str
    scaled: int

    @property
    def amount(self) -> Decimal:
        return Decimal(format_scaled(self.scaled))

    def __str__(self) -> str:
        return f'{self.currency} {format_scaled(self.scaled)}'


@dataclass(frozen=True)
class RawListing:
    market: str = ''
    captured_at: int = 0
    title: str = ''
    description: str = ''
    vendor: str = ''
    price_text: str = ''
    ship_from_text: str = ''
    ship_to_text: str = ''


@dataclass(frozen=True)
class ListingRecord:
    product_name: str
    substance: Optional[str] = None
    drug_class: Optional[str] = None
    dosage: Optional[Measure] = None
    quantity: Optional[Measure] = None
    vendor: str = ''
    price: Optional[Price] = None
    ships_to: Optional[str] = None
    ships_from: Optional[str] = None
    market: str = ''
    diagnostics: Tuple[str, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class MarketSummary:
    vendors: int = 0
    substances: int = 0
    locations: int = 0
    usd_total: Decimal = Decimal(0)
    listings: int = 0
    withdrawals: Optional[Decimal] = None


def parse_measure(text: str, ontology: Ontology) -> Tuple[Optional[Measure], Optional[str]]:
    """First <number><unit> whose unit is a dosage unit. Returns (measure, diagnostic)."""
    rejected = None
    for match in _AMOUNT_UNIT_RE.finditer(text or ''):
        number, unit = match.group(1), match.group(2)
        if ontology.unit_concept(unit) is None:
            continue
        scaled = parse_scaled(number)
        if scaled is None:
            rejected = rejected or f"amount '{number}' has more than {SCALE_DIGITS} fractional digits"
            continue
        if scaled <= 0:
            rejected = rejected or f"amount '{number} {unit}' is not positive"
            continue
        return Measure(scaled, unit.lower()), None
    return None, rejected or 'no <number><unit> pattern found'


def parse_price(text: str) -> Tuple[Optional[Price], Optional[str]]:
    text = (text or '').strip()
    if not text:
        return None, None
    for currency, pattern in _PRICE_PATTERNS:
        match = pattern.search(text)
        if match is None:
            continue
        scaled = parse_scaled(match.group(1))
        if scaled is None:
            return None, f"price amount '{match.group(1)}' has more than {SCALE_DIGITS} fractional digits"
        return Price(currency, scaled), None
    return None, f"unrecognized currency or price format '{text}'"


def extract_listing(raw: RawListing, ontology: Ontology) -> ListingRecord:
    diagnostics: List[str] = []

    mentions = find_drug_mentions(ontology, raw.title) + find_drug_mentions(ontology, raw.description)
    substance = drug_class = None
    if mentions:
        substance = mentions[0].concept_id
        parent = ontology.class_parent(substance)
        drug_class = parent.canonical_name if parent else None
        for extra in mentions[1:]:
            diagnostics.append(f"substance: additional match '{extra.surface}' -> {extra.concept_id}")
    elif raw.title.strip() or raw.description.strip():
        diagnostics.append('substance: no gazetteer match in title or description')

    quantity = dosage = None
    if raw.title.strip():
        quantity, problem = parse_measure(raw.title, ontology)
        if problem:
            diagnostics.append(f'quantity: {problem}')
    if raw.description.strip():
        dosage, problem = parse_measure(raw.description, ontology)
        if problem:
            diagnostics.append(f'dosage: {problem}')

    price, problem = parse_price(raw.price_text)
    if problem:
        diagnostics.append(f'price: {problem}')

    return ListingRecord(
        product_name=raw.title,
        substance=substance,
        drug_class=drug_class,
        dosage=dosage,
        quantity=quantity,
        vendor=raw.vendor.strip(),
        price=price,
        ships_to=raw.ship_to_text.strip() or None,
        ships_from=raw.ship_from_text.strip() or None,
        market=raw.market.strip(),
        diagnostics=tuple(diagnostics),
    )


def parse_listing_line(raw_line: str, line_no: int) -> Tuple[RawListing, Optional[int]]:
    """One input line -> (RawListing, scaled USD value or None)."""
    parts = raw_line.rstrip('\r\n').split('\t')
    if len(parts) not in (len(LISTING_FIELDS), len(LISTING_FIELDS) + 1):
        raise ListingFormatError(
            f'expected {len(LISTING_FIELDS)} or {len(LISTING_FIELDS) + 1} tab-separated fields, got {len(parts)}',
            line=line_no,
        )
    serializer = RawListingSerializer(data=dict(zip(LISTING_FIELDS, parts)))
    if not serializer.is_valid():
        raise ListingFormatError(first_error(serializer.errors), line=line_no)
    usd_value = None
    if len(parts) > len(LISTING_FIELDS) and parts[-1].strip() not in ('', '-'):
        usd_value = parse_scaled(parts[-1].strip())
        if usd_value is None:
            raise ListingFormatError(f"usd_value '{parts[-1]}' is not a decimal amount", line=line_no)
    return RawListing(**serializer.validated_data), usd_value


def read_listings(path) -> List[Tuple[int, RawListing, Optional[int]]]:
    rows = []
    with Path(path).open(encoding='utf-8') as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip() or line.startswith('#'):
                continue
            raw, usd_value = parse_listing_line(line, line_no)
            rows.append((line_no, raw, usd_value))
    logger.info('read %d listings from %s', len(rows), path)
    return rows


def summarize_market(
    records: Sequence[ListingRecord],
    usd_values: Optional[Sequence[Optional[int]]] = None,
    withdrawals: Optional[int] = None,
) -> MarketSummary:
    """usd_values and withdrawals are scaled integers (see parse_scaled)."""
    if usd_values is not None and len(usd_values) != len(records):
        raise ValueError(f'usd_values has {len(usd_values)} entries for {len(records)} records.')
    vendors = {r.vendor for r in records if r.vendor}
    substances = {r.substance for r in records if r.substance}
    locations = {loc for r in records for loc in (r.ships_from, r.ships_to) if loc}
    usd_scaled = sum(v for v in (usd_values or ()) if v is not None)
    return MarketSummary(
        vendors=len(vendors),
        substances=len(substances),
        locations=len(locations),
        usd_total=Decimal(format_scaled(usd_scaled)),
        listings=len(records),
        withdrawals=Decimal(format_scaled(withdrawals)) if withdrawals is not None else None,
    )


def share_bucket(substance: str, ontology: Ontology) -> str:
    category = ontology.category_of(substance)
    if category != UNCATEGORIZED:
        return category.value
    if NSO_CLASS_ID in ontology.concepts and ontology.reaches(substance, NSO_CLASS_ID):
        return NOVEL_SYNTHETIC_OPIOID
    return UNCATEGORIZED_SHARE


def category_shares(records: Iterable[ListingRecord], ontology: Ontology) -> Dict[str, float]:
    counts = Counter(share_bucket(r.substance, ontology) for r in records if r.substance)
    total = sum(counts.values())
    if not total:
        return {}
    return {bucket: counts[bucket] / total for bucket in sorted(counts)}


RECORD_COLUMNS = (
    'product_name', 'substance', 'drug_class', 'dosage', 'quantity',
    'vendor', 'price', 'ships_to', 'ships_from',
)


def record_row(record: ListingRecord) -> List[str]:
    def cell(value):
        return '-' if value is None else str(value)

    return [
        record.product_name.replace('\t', ' '),
        cell(record.substance),
        cell(record.drug_class),
        cell(record.dosage),
        cell(record.quantity),
        record.vendor or '-',
        cell(record.price),
        cell(record.ships_to),
        cell(record.ships_from),
    ]
