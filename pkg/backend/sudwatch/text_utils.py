"""Tokenization and normalization shared by the gazetteer, encoders and topic extraction."""

import re
from dataclasses import dataclass
from typing import List

MASK_PATTERN = r'\[DRUG_[A-Z]+\]'
MASK_RE = re.compile(MASK_PATTERN)

# Alphanumeric runs joined by single inner hyphens, commas, dots or apostrophes.
# Runs with a digit stay whole ("U-47,700", "1.5"); letter-only runs are split
# again at commas and dots by _WORD_PIECE_RE. Mask tokens are atomic.
SPAN_RE = re.compile(MASK_PATTERN + r"|[A-Za-z0-9]+(?:[-,.'][A-Za-z0-9]+)*")
_WORD_PIECE_RE = re.compile(r"[A-Za-z0-9]+(?:[-'][A-Za-z0-9]+)*")

_EDGE_PUNCT_RE = re.compile(r"^[^\w\[\]]+|[^\w\[\]]+$")
_INNER_COMMA_RE = re.compile(r'(?<=[A-Za-z0-9]),(?=[A-Za-z0-9])')
_WS_RE = re.compile(r'\s+')


@dataclass(frozen=True)
class Span:
    text: str
    start: int
    end: int


def spans(text: str) -> List[Span]:
    out = []
    for m in SPAN_RE.finditer(text or ''):
        tok = m.group(0)
        if tok.startswith('[') or any(ch.isdigit() for ch in tok) or not any(ch in tok for ch in ',.'):
            out.append(Span(tok, m.start(), m.end()))
            continue
        for piece in _WORD_PIECE_RE.finditer(tok):
            out.append(Span(piece.group(0), m.start() + piece.start(), m.start() + piece.end()))
    return out


def is_mask_token(token: str) -> bool:
    return MASK_RE.fullmatch(token) is not None


def normalize_term(term: str) -> str:
    """Lowercase, strip edge punctuation, drop commas inside codes, collapse whitespace."""
    value = _WS_RE.sub(' ', term or '').strip().lower()
    parts = []
    for part in value.split(' '):
        part = _EDGE_PUNCT_RE.sub('', part)
        part = _INNER_COMMA_RE.sub('', part)
        if part:
            parts.append(part)
    return ' '.join(parts)


def token_key(token: str) -> str:
    """Lookup key of one normalized token.

    Code-like tokens (letters and digits, e.g. "u-47700") also lose hyphens and
    dots, so "U-47,700", "u47700" and "U-47700" share a key.
    """
    token = normalize_term(token)
    if any(ch.isdigit() for ch in token) and any(ch.isalpha() for ch in token):
        token = token.replace('-', '').replace('.', '')
    return token


def term_key(term: str) -> str:
    return ' '.join(token_key(tok) for tok in normalize_term(term).split(' ') if tok)


def tokenize(text: str) -> List[str]:
    """Lowercased word tokens; mask tokens are kept verbatim."""
    return [s.text if s.text.startswith('[') else s.text.lower() for s in spans(text)]
