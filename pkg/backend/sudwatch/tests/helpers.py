"""Fixtures shared by the test modules."""

from functools import lru_cache
from pathlib import Path
from typing import Optional

from ..corpus import Corpus, Post
from ..ontology_store import Ontology, load_ontology
from ..sentiment_rules import SentimentLexicon, load_lexicon

DATA_DIR = Path(__file__).resolve().parent.parent / 'data'
ONTOLOGY_PATH = DATA_DIR / 'dao_fixture.tsv'
LEXICON_PATH = DATA_DIR / 'sentiment_lexicon.tsv'
STOPWORDS_PATH = DATA_DIR / 'stopwords.txt'
LISTINGS_PATH = DATA_DIR / 'listings_sample.tsv'
SYNTH_CONFIG_PATH = DATA_DIR / 'synthetic_config.json'

DAY = 86400


@lru_cache(maxsize=None)
def fixture_ontology() -> Ontology:
    return load_ontology(ONTOLOGY_PATH)


@lru_cache(maxsize=None)
def fixture_lexicon() -> SentimentLexicon:
    return load_lexicon(LEXICON_PATH)


def make_post(
    post_id: str,
    author: str = 'u1',
    timestamp: int = 0,
    text: str = 'nothing much',
    sentiment: Optional[str] = None,
    emotion: Optional[str] = None,
    sud: Optional[str] = None,
    source: str = 'r/opiates',
    tags=frozenset(),
) -> Post:
    return Post(
        id=post_id, author=author, source=source, timestamp=timestamp, text=text,
        drug_tags=frozenset(tags), sentiment_label=sentiment, emotion_label=emotion, sud_label=sud,
    )


def corpus_of(*posts: Post, tagged: bool = False) -> Corpus:
    return Corpus(posts=tuple(posts), tagged=tagged)
