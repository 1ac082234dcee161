"""
Lexicon-driven sentiment scoring in the VADER manner.

Lexicon file:
    token<TAB>valence            valence in [-4, 4]
    [boosters]
    token<TAB>+0.293|-0.293
    [negations]
    token
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Tuple

from .corpus import Corpus
from .exceptions import LexiconFormatError
from .labels import Sentiment
from .text_utils import MASK_RE

logger = logging.getLogger(__name__)

_EMOTICON_RE = re.compile(r"^(?:[<>]?[:;=8][\-o\*']?[\)\]\(\[dDpP/\\:\}\{@\|]+|[\)\]\(\[dDpP/\\:\}\{@\|]+[\-o\*']?[:;=8]|<3|</3)$")
_EDGE_PUNCT_RE = re.compile(r"^[^\w]+|[^\w]+$")


@dataclass(frozen=True)
class SentimentConstants:
    booster: float = 0.293
    negation_scalar: float = -0.74
    caps_increment: float = 0.733
    exclamation_increment: float = 0.292
    exclamation_cap: int = 3
    alpha: float = 15.0
    threshold: float = 0.05
    damping: Tuple[float, ...] = (1.0, 0.95, 0.90)
    pooling: str = 'sum'


DEFAULT_CONSTANTS = SentimentConstants()


@dataclass(frozen=True)
class SentimentLexicon:
    valence: Mapping[str, float] = field(default_factory=dict)
    boosters: Mapping[str, float] = field(default_factory=dict)
    negations: FrozenSet[str] = frozenset()

    def is_negation(self, token: str) -> bool:
        return token in self.negations or token.endswith("n't")


@dataclass(frozen=True)
class SentimentScore:
    compound: float
    token_scores: List[Tuple[str, float]]
    label: str


def parse_lexicon(lines: Iterable[str], constants: SentimentConstants = DEFAULT_CONSTANTS) -> SentimentLexicon:
    valence: Dict[str, float] = {}
    boosters: Dict[str, float] = {}
    negations = set()
    section = 'valence'
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if line in ('[boosters]', '[negations]'):
            section = line[1:-1]
            continue
        if section == 'negations':
            negations.add(line.lower())
            continue
        parts = line.split('\t')
        if len(parts) != 2:
            raise LexiconFormatError('expected token<TAB>value', line=line_no)
        token = parts[0].strip().lower()
        try:
            value = float(parts[1])
        except ValueError as exc:
            raise LexiconFormatError(f"value '{parts[1]}' for '{token}' is not a number", line=line_no) from exc
        if section == 'valence':
            if not -4.0 <= value <= 4.0:
                raise LexiconFormatError(f"valence {value} for '{token}' outside [-4, 4]", line=line_no)
            valence[token] = value
        else:
            if abs(abs(value) - constants.booster) > 1e-12:
                raise LexiconFormatError(
                    f"booster '{token}' must be +/-{constants.booster}, got {value}", line=line_no
                )
            boosters[token] = math.copysign(constants.booster, value)
    return SentimentLexicon(valence=valence, boosters=boosters, negations=frozenset(negations))


def load_lexicon(path, constants: SentimentConstants = DEFAULT_CONSTANTS) -> SentimentLexicon:
    with Path(path).open(encoding='utf-8') as handle:
        lexicon = parse_lexicon(handle, constants)
    logger.info(
        'loaded sentiment lexicon %s: %d valence, %d boosters, %d negations',
        path, len(lexicon.valence), len(lexicon.boosters), len(lexicon.negations),
    )
    return lexicon


def sentiment_tokens(text: str) -> List[str]:
    """Whitespace split, edge punctuation stripped, emoticons kept whole, mask tokens dropped. Case preserved."""
    tokens = []
    for chunk in (text or '').split():
        if _EMOTICON_RE.match(chunk):
            tokens.append(chunk)
            continue
        if MASK_RE.search(chunk):
            continue
        word = _EDGE_PUNCT_RE.sub('', chunk)
        if word:
            tokens.append(word)
    return tokens


def _is_all_caps(token: str) -> bool:
    return token.isupper()


def normalize_score(s: float, alpha: float = 15.0) -> float:
    compound = s / math.sqrt(s * s + alpha)
    return max(-1.0, min(1.0, compound))


def label_for(compound: float, threshold: float = 0.05) -> str:
    if compound >= threshold:
        return Sentiment.POSITIVE.value
    if compound <= -threshold:
        return Sentiment.NEGATIVE.value
    return Sentiment.NEUTRAL.value


def score_post(
    text: str,
    lexicon: SentimentLexicon,
    constants: SentimentConstants = DEFAULT_CONSTANTS,
) -> SentimentScore:
    tokens = sentiment_tokens(text)
    lowered = [t.lower() for t in tokens]
    caps = sum(1 for t in tokens if _is_all_caps(t))
    mixed_case = 0 < caps < len(tokens)

    token_scores: List[Tuple[str, float]] = []
    for i, token in enumerate(lowered):
        if token not in lexicon.valence:
            continue
        raw = lexicon.valence[token]
        value = raw
        negated = False
        for distance, damping in enumerate(constants.damping, start=1):
            j = i - distance
            if j < 0:
                break
            before = lowered[j]
            if before in lexicon.boosters and before not in lexicon.valence:
                scalar = lexicon.boosters[before]
                if raw < 0:
                    scalar = -scalar
                value += scalar * damping
            if lexicon.is_negation(before):
                negated = True
        if negated:
            value *= constants.negation_scalar
        if mixed_case and _is_all_caps(tokens[i]) and value != 0:
            value += math.copysign(constants.caps_increment, value)
        token_scores.append((tokens[i], value))

    values = [v for _, v in token_scores]
    s = math.fsum(values)
    if constants.pooling == 'average' and values:
        s /= len(values)
    if s != 0:
        bangs = min((text or '').count('!'), constants.exclamation_cap)
        s += math.copysign(bangs * constants.exclamation_increment, s)
    compound = normalize_score(s, constants.alpha)
    return SentimentScore(compound=compound, token_scores=token_scores, label=label_for(compound, constants.threshold))


def label_corpus(
    corpus: Corpus,
    lexicon: SentimentLexicon,
    constants: SentimentConstants = DEFAULT_CONSTANTS,
) -> Corpus:
    """Fills (and overwrites) sentiment_label on every post."""
    return corpus.with_posts(
        replace(post, sentiment_label=score_post(post.text, lexicon, constants).label)
        for post in corpus.posts
    )
