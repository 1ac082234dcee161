"""
Deterministic synthetic SUD corpora with a planted labelling rule.

Each post carries one drug mention, two cue slots and three emotion words.
The cue slots give a text score in {-2, -1, 1, 2} (risk minus protective cues).

    text_only:          SUDP iff text_score > 0
    history_dependent:  SUDP iff text_score + weight * h > 0, where h = +1 when
                        any of the author's previous `window` posts carries a
                        distress emotion (Sadness, Fear, Anger) and -1 otherwise

Noise swaps one of the three emotion words for a word of the opposite mood;
the emotion label stays the majority mood, so labels are never flipped.
"""

import json
import logging
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .corpus import Corpus, Post
from .labels import Emotion, SudLabel
from .neural_core import keyed_rng
from .sentiment_rules import SentimentLexicon, label_corpus

logger = logging.getLogger(__name__)

SIGNALS = ('history_dependent', 'text_only')

DISTRESS = (Emotion.SADNESS, Emotion.FEAR, Emotion.ANGER)
CALM = (Emotion.JOY, Emotion.LOVE, Emotion.THANKFULNESS, Emotion.SURPRISE)

EMOTION_WORDS = {
    Emotion.JOY: ('happy', 'cheerful', 'glad', 'delighted'),
    Emotion.SADNESS: ('sad', 'lonely', 'hopeless', 'crying'),
    Emotion.ANGER: ('angry', 'furious', 'annoyed', 'irritated'),
    Emotion.LOVE: ('love', 'adore', 'cherish', 'affection'),
    Emotion.FEAR: ('scared', 'afraid', 'terrified', 'anxious'),
    Emotion.THANKFULNESS: ('thankful', 'grateful', 'blessed', 'appreciate'),
    Emotion.SURPRISE: ('surprised', 'shocked', 'unexpected', 'amazed'),
}
RISK_CUES = ('craving', 'relapsed', 'hooked', 'tolerance', 'binge', 'compulsive', 'shaking', 'hustling')
PROTECTIVE_CUES = ('sober', 'recovery', 'meeting', 'sponsor', 'counselor', 'tapering', 'quit', 'clean')
NEUTRAL_CUES = ('talked', 'wondered', 'asked', 'mentioned', 'noticed', 'figured', 'guessed', 'remembered')
FILLERS = (
    'today', 'went', 'store', 'later', 'then', 'people', 'around', 'town', 'after',
    'work', 'night', 'week', 'morning', 'friends', 'home', 'place', 'car', 'phone',
)
# Surface forms per category source; several forms per category keep masking meaningful.
DRUG_SURFACES = (
    ('heroin', 'heroin'), ('dope', 'heroin'), ('black tar', 'heroin'), ('smack', 'heroin'),
    ('fentanyl', 'fentanyl'), ('fent', 'fentanyl'), ('china girl', 'fentanyl'),
    ('oxycodone', 'oxycodone'), ('percocet', 'oxycodone'), ('roxy', 'oxycodone'),
    ('kratom', 'kratom'), ('ketum', 'kratom'),
    ('opium', 'opium'), ('poppy tea', 'opium'),
    ('carfentanil', 'opiates'), ('acetylfentanyl', 'opiates'),
    ('krokodil', 'opiates'), ('duragesic', 'opiates'),
)
TEXT_SCORES = (-2, -1, 1, 2)
EPOCH_START = 1420070400   # 2015-01-01T00:00:00Z
EPOCH_SPAN = 4 * 365 * 86400


@dataclass(frozen=True)
class SynthConfig:
    n_authors: int = 100
    posts_per_author: int = 20
    signal: str = 'history_dependent'
    noise: float = 0.1
    distress_rate: float = 0.15
    window: int = 10
    history_weight: float = 1.5

    def __post_init__(self):
        if self.n_authors < 1 or self.posts_per_author < 1:
            raise ValueError('n_authors and posts_per_author must be >= 1.')
        if self.signal not in SIGNALS:
            raise ValueError(f"signal must be one of: {', '.join(SIGNALS)}.")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError('noise must be in [0, 1].')


@dataclass(frozen=True)
class SynthPost:
    """A generated post with the latent variables behind its label."""
    post: Post
    text_score: int
    history_flag: int


def planted_label(text_score: int, history_flag: int, config: SynthConfig) -> str:
    if config.signal == 'text_only':
        positive = text_score > 0
    else:
        positive = text_score + config.history_weight * history_flag > 0
    return SudLabel.SUDP.value if positive else SudLabel.SUDA.value


def _author_posts(author_index: int, config: SynthConfig, seed: int) -> List[SynthPost]:
    rng = keyed_rng(seed, 'synth-author', author_index)
    author = f'user{author_index:04d}'
    timestamp = EPOCH_START + int(rng.integers(0, EPOCH_SPAN))
    emotions: List[Emotion] = []
    generated = []
    for k in range(config.posts_per_author):
        timestamp += int(rng.integers(3600, 5 * 86400))
        if rng.random() < config.distress_rate:
            emotion = DISTRESS[int(rng.integers(len(DISTRESS)))]
        else:
            emotion = CALM[int(rng.integers(len(CALM)))]
        words = [str(w) for w in rng.choice(EMOTION_WORDS[emotion], size=3, replace=False)]
        if rng.random() < config.noise:
            opposite = CALM if emotion in DISTRESS else DISTRESS
            other = opposite[int(rng.integers(len(opposite)))]
            words[int(rng.integers(3))] = str(rng.choice(EMOTION_WORDS[other]))

        text_score = TEXT_SCORES[int(rng.integers(len(TEXT_SCORES)))]
        cue_pool = RISK_CUES if text_score > 0 else PROTECTIVE_CUES
        cues = [str(w) for w in rng.choice(cue_pool, size=abs(text_score), replace=False)]
        cues += [str(rng.choice(NEUTRAL_CUES)) for _ in range(2 - abs(text_score))]

        surface, source = DRUG_SURFACES[int(rng.integers(len(DRUG_SURFACES)))]
        units = [surface] + cues + words + [str(w) for w in rng.choice(FILLERS, size=3, replace=False)]
        order = rng.permutation(len(units))
        text = ' '.join(units[int(i)] for i in order)

        recent = emotions[-config.window:] if config.window > 0 else []
        history_flag = 1 if any(e in DISTRESS for e in recent) else -1
        post = Post(
            id=f'a{author_index:04d}p{k:03d}',
            author=author,
            source=f'r/{source}',
            timestamp=timestamp,
            text=text,
            emotion_label=emotion.value,
            sud_label=planted_label(text_score, history_flag, config),
        )
        generated.append(SynthPost(post, text_score, history_flag))
        emotions.append(emotion)
    return generated


def generate_posts(config: SynthConfig, seed: int) -> List[SynthPost]:
    posts = []
    for author_index in range(config.n_authors):
        posts.extend(_author_posts(author_index, config, seed))
    return posts


def single_post_ceiling(posts: List[SynthPost]) -> float:
    """Best accuracy of any classifier that sees only the post itself.

    Posts are grouped by what one post reveals (text score and emotion); each
    group contributes its majority-label count.
    """
    if not posts:
        return 1.0
    groups: Dict[Tuple[int, str], Counter] = defaultdict(Counter)
    for item in posts:
        groups[(item.text_score, item.post.emotion_label)][item.post.sud_label] += 1
    return sum(max(c.values()) for c in groups.values()) / len(posts)


def build_manifest(config: SynthConfig, seed: int, posts: List[SynthPost]) -> dict:
    labels = Counter(item.post.sud_label for item in posts)
    if config.signal == 'text_only':
        rule = 'SUDP iff text_score > 0'
    else:
        rule = (
            f'SUDP iff text_score + {config.history_weight} * h > 0; '
            f'h = +1 if any of the previous {config.window} posts by the author has emotion '
            f'in {{{", ".join(e.value for e in DISTRESS)}}}, else -1'
        )
    return {
        'config': asdict(config),
        'seed': seed,
        'rule': rule,
        'text_score': 'count(risk cues) - count(protective cues)',
        'risk_cues': list(RISK_CUES),
        'protective_cues': list(PROTECTIVE_CUES),
        'posts': len(posts),
        'labels': {label.value: labels.get(label.value, 0) for label in SudLabel},
        'single_post_ceiling': round(single_post_ceiling(posts), 6),
        'history_aware_ceiling': 1.0,
    }


def synth_generate(
    config: SynthConfig,
    seed: int,
    lexicon: Optional[SentimentLexicon] = None,
) -> Tuple[Corpus, dict]:
    """Returns (corpus, manifest). With a lexicon, sentiment labels are filled by rule scoring."""
    posts = generate_posts(config, seed)
    corpus = Corpus(posts=tuple(item.post for item in posts))
    if lexicon is not None:
        corpus = label_corpus(corpus, lexicon)
    manifest = build_manifest(config, seed, posts)
    logger.info(
        'generated %d synthetic posts (%s, noise=%s); single-post ceiling %.4f',
        len(corpus), config.signal, config.noise, manifest['single_post_ceiling'],
    )
    return corpus, manifest


def write_manifest(manifest: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + '\n', encoding='utf-8')
