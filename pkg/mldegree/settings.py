"""
Django settings for the mldegree project.

The project has no HTTP surface: Django provides configuration, logging,
management commands and the test runner.

For more information on this file, see
https://docs.djangoproject.com/en/5.0/topics/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Commands never serve requests; the key only satisfies Django's checks.
SECRET_KEY = os.environ.get('MLDEG_SECRET_KEY', 'mldegree-local-only')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'sbm_ml',
]

REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'COERCE_DECIMAL_TO_STRING': False,
}


# Database
# Only the test runner touches it.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
# Payloads go to stdout; every diagnostic goes to stderr through this config.

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'sbm_ml': {
            'handlers': ['console'],
            'level': os.environ.get('MLDEG_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}


# Likelihood pipeline defaults

MLDEG = {
    'DEFAULT_SEED': 1729,
    'TRIALS': 3,
    'MIN_AGREEING_SEEDS': 3,
    'THREADS': int(os.environ.get('MLDEG_THREADS', '1')),
    'RESIDUAL_TOLERANCE': 1e-8,
    'DEDUP_TOLERANCE': 1e-6,
    'MAX_CODIM': 14,
    'TRACKER': {
        'INITIAL_STEP': 0.05,
        'MIN_STEP': 1e-7,
        'MAX_STEP': 0.1,
        'CORRECTOR_TOLERANCE': 1e-10,
        'MAX_CORRECTOR_ITERATIONS': 5,
        'DIVERGENCE_NORM': 1e8,
        'MAX_STEPS': 50_000,
    },
    'MLE': {
        'GRADIENT_TOLERANCE': 1e-12,
        'MAX_ITERATIONS': 200,
    },
    'EXPORT_DIR': BASE_DIR / 'exports',
}
