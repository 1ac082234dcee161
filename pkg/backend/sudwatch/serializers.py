"""DRF serializers validating file records and run configuration."""

from datetime import timezone as dt_timezone

from django.utils.dateparse import parse_datetime
from django.utils import timezone
from rest_framework import serializers

from .labels import ConceptKind, DrugCategory, Emotion, Sentiment, SudLabel, TermKind

NONE_MARK = '-'


def _choices(enum_cls):
    return [member.value for member in enum_cls]


def _optional_choice(value: str, enum_cls, field_name: str):
    value = (value or '').strip()
    if value in ('', NONE_MARK):
        return None
    allowed = _choices(enum_cls)
    if value not in allowed:
        raise serializers.ValidationError(
            f"{field_name} must be one of {', '.join(allowed)} or '{NONE_MARK}'."
        )
    return value


class ConceptRecordSerializer(serializers.Serializer):
    id = serializers.CharField()
    kind = serializers.ChoiceField(choices=_choices(ConceptKind))
    canonical = serializers.CharField()
    parents = serializers.CharField(required=False, allow_blank=True, default='')

    def validate_parents(self, value):
        value = (value or '').strip()
        if value in ('', NONE_MARK):
            return []
        parents = [p.strip() for p in value.split(',')]
        if any(not p for p in parents):
            raise serializers.ValidationError('parents must be a comma-separated list of concept ids.')
        return parents


class LexiconRecordSerializer(serializers.Serializer):
    surface = serializers.CharField()
    concept_id = serializers.CharField()
    term_kind = serializers.ChoiceField(choices=_choices(TermKind))


class CategoryRootRecordSerializer(serializers.Serializer):
    category = serializers.ChoiceField(choices=_choices(DrugCategory))
    concept_id = serializers.CharField()


class PostRecordSerializer(serializers.Serializer):
    id = serializers.CharField()
    author = serializers.CharField()
    source = serializers.CharField(allow_blank=True)
    timestamp = serializers.CharField()
    sentiment_label = serializers.CharField(allow_blank=True)
    emotion_label = serializers.CharField(allow_blank=True)
    sud_label = serializers.CharField(allow_blank=True)
    text = serializers.CharField(allow_blank=True, trim_whitespace=False)
    drug_tags = serializers.CharField(required=False, allow_blank=True, default='')

    @staticmethod
    def parse_timestamp(raw_value: str) -> int:
        value = (raw_value or '').strip()
        if value.lstrip('-').isdigit():
            seconds = int(value)
        else:
            try:
                parsed = parse_datetime(value)
            except ValueError:
                parsed = None
            if parsed is None:
                raise serializers.ValidationError(
                    "timestamp must be ISO-8601 (example: 2016-03-01T12:00:00Z) or UTC seconds."
                )
            if timezone.is_naive(parsed):
                parsed = timezone.make_aware(parsed, dt_timezone.utc)
            seconds = int(parsed.timestamp())
        if seconds < 0:
            raise serializers.ValidationError('timestamp must not precede 1970-01-01T00:00:00Z.')
        return seconds

    def validate_timestamp(self, value):
        return self.parse_timestamp(value)

    def validate_sentiment_label(self, value):
        return _optional_choice(value, Sentiment, 'sentiment')

    def validate_emotion_label(self, value):
        return _optional_choice(value, Emotion, 'emotion')

    def validate_sud_label(self, value):
        return _optional_choice(value, SudLabel, 'sud')

    def validate_drug_tags(self, value):
        value = (value or '').strip()
        if value in ('', NONE_MARK):
            return frozenset()
        allowed = set(_choices(DrugCategory))
        tags = [t.strip() for t in value.split(',')]
        unknown = [t for t in tags if t not in allowed]
        if unknown:
            raise serializers.ValidationError(f"unknown drug tag(s): {', '.join(unknown)}.")
        return frozenset(DrugCategory(t) for t in tags)


class RawListingSerializer(serializers.Serializer):
    market = serializers.CharField(allow_blank=True)
    captured_at = serializers.IntegerField(min_value=0)
    title = serializers.CharField(allow_blank=True, trim_whitespace=False)
    description = serializers.CharField(allow_blank=True, trim_whitespace=False)
    vendor = serializers.CharField(allow_blank=True)
    price_text = serializers.CharField(allow_blank=True)
    ship_from_text = serializers.CharField(allow_blank=True)
    ship_to_text = serializers.CharField(allow_blank=True)


class SynthConfigSerializer(serializers.Serializer):
    n_authors = serializers.IntegerField(min_value=1)
    posts_per_author = serializers.IntegerField(min_value=1)
    signal = serializers.ChoiceField(choices=['history_dependent', 'text_only'])
    noise = serializers.FloatField(min_value=0.0, max_value=1.0)
    distress_rate = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.15)


class RunConfigSerializer(serializers.Serializer):
    ontology_path = serializers.CharField(allow_blank=True)
    corpus_path = serializers.CharField(allow_blank=True)
    lexicon_path = serializers.CharField(allow_blank=True)
    stopwords_path = serializers.CharField(allow_blank=True)
    out_dir = serializers.CharField(allow_blank=True)
    embed_dim = serializers.IntegerField(min_value=2)
    feature_dim = serializers.IntegerField(min_value=1)
    hidden_dim = serializers.IntegerField(min_value=1)
    attention_dim = serializers.IntegerField(min_value=1)
    dense_dim = serializers.IntegerField(min_value=1)
    history_window = serializers.IntegerField(min_value=0)
    epochs = serializers.IntegerField(min_value=0)
    lr_head = serializers.FloatField()
    lr_temporal = serializers.FloatField()
    batch_head = serializers.IntegerField(min_value=1)
    batch_temporal = serializers.IntegerField(min_value=1)
    dropout = serializers.FloatField(min_value=0.0)
    seed = serializers.IntegerField(min_value=0)
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False, default=list)
    mask = serializers.BooleanField()
    time_feature = serializers.BooleanField()
    history_key = serializers.ChoiceField(choices=['author', 'drug_stream'])
    attention = serializers.ChoiceField(choices=['additive', 'dot'])
    pooling = serializers.ChoiceField(choices=['sum', 'average'])
    freeze_extractors = serializers.BooleanField()
    jobs = serializers.IntegerField(min_value=1)

    def validate_dropout(self, value):
        if value >= 1.0:
            raise serializers.ValidationError('dropout must be in [0, 1).')
        return value

    def validate(self, attrs):
        for name in ('lr_head', 'lr_temporal'):
            if attrs[name] <= 0:
                raise serializers.ValidationError({name: 'learning rate must be positive.'})
        return attrs


def first_error(errors) -> str:
    """Flatten a DRF error structure into one readable line."""
    if isinstance(errors, dict):
        field, detail = next(iter(errors.items()))
        return f'{field}: {first_error(detail)}'
    if isinstance(errors, (list, tuple)) and errors:
        return first_error(errors[0])
    return str(errors)
