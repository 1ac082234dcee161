from pathlib import Path
import os
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent

def _env(name: str, default: str = '') -> str:
    val = os.environ.get(name, default)
    if isinstance(val, str):
        return val.strip().strip('"').strip("'")
    return val


def _env_bool(name: str, default: bool = False) -> bool:
    raw = str(_env(name, str(default))).lower()
    return raw in ('1', 'true', 'yes', 'on')


def _env_int(name: str, default: int) -> int:
    return int(_env(name, str(default)))


def _env_float(name: str, default: float) -> float:
    return float(_env(name, repr(default)))


SECRET_KEY = _env('SECRET_KEY', 'd2s-local-only-key')

DEBUG = _env_bool('DEBUG', False)

INSTALLED_APPS = [
    'rest_framework',
    'sudwatch',
]

# Management commands and tests only; nothing is persisted in a database.
DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s %(levelname)s %(name)s %(message)s',
        },
    },
    'handlers': {
        'stderr': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'sudwatch': {
            'handlers': ['stderr'],
            'level': _env('D2S_LOG_LEVEL', 'INFO').upper(),
            'propagate': False,
        },
    },
}

# Pipeline defaults. Every value can be overridden with D2S_<NAME> in the
# environment, then by a run config file, then by command-line flags.
D2S_DATA_DIR = Path(_env('D2S_DATA_DIR', str(BASE_DIR / 'sudwatch' / 'data')))

D2S = {
    'ontology_path': _env('D2S_ONTOLOGY_PATH', str(D2S_DATA_DIR / 'dao_fixture.tsv')),
    'lexicon_path': _env('D2S_LEXICON_PATH', str(D2S_DATA_DIR / 'sentiment_lexicon.tsv')),
    'stopwords_path': _env('D2S_STOPWORDS_PATH', str(D2S_DATA_DIR / 'stopwords.txt')),
    'corpus_path': _env('D2S_CORPUS_PATH', ''),
    'out_dir': _env('D2S_OUT_DIR', str(BASE_DIR / 'out')),
    # Small dims so CPU training stays quick; raise embed_dim for real corpora.
    'embed_dim': _env_int('D2S_EMBED_DIM', 32),
    'feature_dim': _env_int('D2S_FEATURE_DIM', 32),
    'hidden_dim': _env_int('D2S_HIDDEN_DIM', 16),
    'attention_dim': _env_int('D2S_ATTENTION_DIM', 16),
    'dense_dim': _env_int('D2S_DENSE_DIM', 32),
    'history_window': _env_int('D2S_HISTORY_WINDOW', 10),
    'epochs': _env_int('D2S_EPOCHS', 10),
    'lr_head': _env_float('D2S_LR_HEAD', 1e-3),
    'lr_temporal': _env_float('D2S_LR_TEMPORAL', 1e-3),
    'batch_head': _env_int('D2S_BATCH_HEAD', 32),
    'batch_temporal': _env_int('D2S_BATCH_TEMPORAL', 64),
    'dropout': _env_float('D2S_DROPOUT', 0.2),
    'seed': _env_int('D2S_SEED', 13),
    'mask': _env_bool('D2S_MASK', True),
    'time_feature': _env_bool('D2S_TIME_FEATURE', True),
    'history_key': _env('D2S_HISTORY_KEY', 'author'),
    'attention': _env('D2S_ATTENTION', 'additive'),
    'pooling': _env('D2S_POOLING', 'sum'),
    'freeze_extractors': _env_bool('D2S_FREEZE_EXTRACTORS', True),
    'jobs': _env_int('D2S_JOBS', 1),
}
