"""
Run configuration: settings.D2S defaults, then an optional JSON file, then flags.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from django.conf import settings

from ..classifiers import ModelDims, TrainConfig
from ..exceptions import ConfigError
from ..sentiment_rules import SentimentConstants
from ..serializers import RunConfigSerializer, first_error
from ..temporal import TemporalOptions

logger = logging.getLogger(__name__)

CONFIG_SECTION = 'run'


@dataclass(frozen=True)
class RunConfig:
    ontology_path: str
    corpus_path: str
    lexicon_path: str
    stopwords_path: str
    out_dir: str
    embed_dim: int
    feature_dim: int
    hidden_dim: int
    attention_dim: int
    dense_dim: int
    history_window: int
    epochs: int
    lr_head: float
    lr_temporal: float
    batch_head: int
    batch_temporal: int
    dropout: float
    seed: int
    mask: bool
    time_feature: bool
    history_key: str
    attention: str
    pooling: str
    freeze_extractors: bool
    jobs: int
    seeds: Tuple[int, ...] = field(default=())

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs, lr_head=self.lr_head, lr_temporal=self.lr_temporal,
            batch_head=self.batch_head, batch_temporal=self.batch_temporal,
            dropout=self.dropout, seed=self.seed,
        )

    def dims(self) -> ModelDims:
        return ModelDims(
            embed_dim=self.embed_dim, feature_dim=self.feature_dim, hidden_dim=self.hidden_dim,
            attention_dim=self.attention_dim, dense_dim=self.dense_dim, history_window=self.history_window,
        )

    def temporal_options(self) -> TemporalOptions:
        return TemporalOptions(
            mask=self.mask, time_feature=self.time_feature, history_key=self.history_key,
            scoring=self.attention, freeze_extractors=self.freeze_extractors,
        )

    def sentiment_constants(self) -> SentimentConstants:
        return SentimentConstants(pooling=self.pooling)

    def run_seeds(self, runs: int) -> List[int]:
        """The configured seed list, or seed, seed+1, ... when none is given."""
        if runs < 1:
            raise ConfigError('runs must be >= 1.')
        if self.seeds:
            if len(self.seeds) < runs:
                raise ConfigError(f'{runs} runs requested but the config lists {len(self.seeds)} seeds.')
            return list(self.seeds[:runs])
        return [self.seed + i for i in range(runs)]

    def as_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values['seeds'] = list(self.seeds)
        return values


def load_config_file(path) -> Dict[str, Any]:
    """The 'run' section of a JSON config, or the whole object when it has none."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f'config file not found: {path}')
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ConfigError(f'{path}: invalid JSON ({exc.msg})', line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigError(f'{path}: top level must be a JSON object')
    if CONFIG_SECTION in data:
        data = data[CONFIG_SECTION]
    elif 'synth' in data:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: '{CONFIG_SECTION}' must be a JSON object")
    unknown = sorted(set(data) - set(RunConfigSerializer().fields))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
    return data


def resolve_run_config(config_path=None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    merged: Dict[str, Any] = dict(settings.D2S)
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    serializer = RunConfigSerializer(data=merged)
    if not serializer.is_valid():
        raise ConfigError(f'invalid run config: {first_error(serializer.errors)}')
    validated = dict(serializer.validated_data)
    validated['seeds'] = tuple(validated.get('seeds') or ())
    config = RunConfig(**validated)
    logger.info('run config %s', json.dumps(config.as_dict(), sort_keys=True))
    return config
