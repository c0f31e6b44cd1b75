"""
Django settings for the NEEDLECOMP project.

The project has no database and no HTTP surface: it is driven entirely through
management commands (see ``cli/management/commands``). Numeric defaults used
by every app live in the ``NEEDLECOMP`` block at the bottom of this file.
"""

from pathlib import Path
import os
from dotenv import load_dotenv
load_dotenv()

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'needlecomp-local-only-0c9f2b71e4d84a6f')

DEBUG = os.environ.get('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    # Custom apps
    'common',
    'comparison_kernel',
    'needle_1d',
    'model_spaces',
    'discrete_needles',
    'cli',
]

# No persistence: reports and samples are plain files.
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Create logs directory if it doesn't exist
LOGS_DIR = Path(os.environ.get('LOG_DIR', BASE_DIR / 'logs'))
LOGS_DIR.mkdir(parents=True, exist_ok=True)

LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'level': LOG_LEVEL,
            'class': 'logging.FileHandler',
            'filename': LOGS_DIR / 'needlecomp.log',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file'],
            'level': 'WARNING',
            'propagate': True,
        },
        'common': {
            'handlers': ['file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'comparison_kernel': {
            'handlers': ['file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'needle_1d': {
            'handlers': ['file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'model_spaces': {
            'handlers': ['file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'discrete_needles': {
            'handlers': ['file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'cli': {
            'handlers': ['file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw in (None, ''):
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


# Numeric defaults. Every operation accepts explicit overrides; this block is
# echoed into every CLI report so a run can be reproduced from its output.
NEEDLECOMP = {
    # comparison_kernel
    'ROOT_RTOL': 1e-12,
    'SIGMA_EDGE_FRACTION': 1e-12,
    'STABILITY_DELTA_MAX': 0.5,
    'STABILITY_GRID_STEPS': 60,
    # needle_1d
    'CLOSED_FORM_TOL': 1e-8,
    'SAMPLED_TOL': 1e-4,
    'DERIVATIVE_ORDER': 4,
    'BACKWARD_MC_WINDOW_POINTS': 6,
    'EXTREMAL_SAMPLES': 2001,
    'SIGMA_READING': 'k_over_n_minus_one',
    # model_spaces
    'SAMPLE_SIZE_CAP': 100_000,
    'VOLUME_SAMPLE_STEPS': 2000,
    # discrete_needles
    'TRANSPORT_TOL': 1e-6,
    'VERIFY_TOL': 1e-6,
    'QUANTILE': 0.05,
    'MAX_UNASSIGNED_FRACTION': 0.2,
    'MIN_CHAIN_POINTS': 4,
    'BUNDLE_POINTS': 300,
    'BOUNDARY_CORRECTION': 'midpoint',
    'METRIC_BLOCK_ROWS': 512,
    'TRIANGLE_CHECK_SAMPLES': 20_000,
    'THREADS': _env_int('NEEDLECOMP_THREADS', os.cpu_count() or 1),
}
