"""Closed label sets used across the pipeline."""

from enum import Enum


class DrugCategory(str, Enum):
    HEROIN = 'Heroin'
    SYNTHETIC_HEROIN = 'SyntheticHeroin'
    PHARMACEUTICAL_FENTANYL = 'PharmaceuticalFentanyl'
    NON_PHARMACEUTICAL_FENTANYL = 'NonPharmaceuticalFentanyl'
    FENTANYL = 'Fentanyl'
    OXYCODONE = 'Oxycodone'
    KRATOM = 'Kratom'
    OPIUM = 'Opium'

    @property
    def mask_token(self) -> str:
        return f'[DRUG_{self.value.upper()}]'


UNCATEGORIZED = 'uncategorized'
UNK_MASK_TOKEN = '[DRUG_UNK]'
MASK_TOKENS = tuple(c.mask_token for c in DrugCategory) + (UNK_MASK_TOKEN,)

# Reporting buckets for listing shares beyond the eight categories.
NOVEL_SYNTHETIC_OPIOID = 'NovelSyntheticOpioid'
UNCATEGORIZED_SHARE = 'Uncategorized'


class ConceptKind(str, Enum):
    SUBSTANCE_CLASS = 'substance_class'
    SUBSTANCE = 'substance'
    ROUTE_OF_ADMINISTRATION = 'route_of_administration'
    DOSAGE_UNIT = 'dosage_unit'
    PHYSIOLOGICAL_EFFECT = 'physiological_effect'
    SUBSTANCE_FORM = 'substance_form'


DRUG_KINDS = frozenset({ConceptKind.SUBSTANCE, ConceptKind.SUBSTANCE_CLASS})


class TermKind(str, Enum):
    SLANG = 'slang'
    BRAND = 'brand'
    GENERIC = 'generic'
    SCIENTIFIC = 'scientific'
    STREET = 'street'
    ABBREVIATION = 'abbreviation'


class Sentiment(str, Enum):
    POSITIVE = 'Positive'
    NEGATIVE = 'Negative'
    NEUTRAL = 'Neutral'


class Emotion(str, Enum):
    JOY = 'Joy'
    SADNESS = 'Sadness'
    ANGER = 'Anger'
    LOVE = 'Love'
    FEAR = 'Fear'
    THANKFULNESS = 'Thankfulness'
    SURPRISE = 'Surprise'


class SudLabel(str, Enum):
    SUDP = 'SUDP'
    SUDA = 'SUDA'


# Class order of each prediction task; index i is output unit i.
TASK_LABELS = {
    'sentiment': tuple(s.value for s in Sentiment),
    'emotion': tuple(e.value for e in Emotion),
    'sud': tuple(s.value for s in SudLabel),
}

TASK_FIELDS = {
    'sentiment': 'sentiment_label',
    'emotion': 'emotion_label',
    'sud': 'sud_label',
}
