"""
Django settings for the fwlab project.

Numerical experiments run through management commands; the database only
holds the run registry of the experiments app.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='fwlab-insecure-development-key')

DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Local apps
    "spectral",
    "drift",
    "noise",
    "skeleton",
    "spde",
    "rate",
    "rare_events",
    "property_lab",
    "experiments",
]


# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases

DATABASE_ENGINE = config('DATABASE_ENGINE', default='django.db.backends.sqlite3')

if DATABASE_ENGINE.endswith('sqlite3'):
    DATABASES = {
        "default": {
            "ENGINE": DATABASE_ENGINE,
            "NAME": config('DATABASE_NAME', default=str(BASE_DIR / 'fwlab.sqlite3')),
        }
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": DATABASE_ENGINE,
            "NAME": config('DATABASE_NAME'),
            "USER": config('DATABASE_USER'),
            "PASSWORD": config('DATABASE_PASSWORD'),
            "HOST": config('DATABASE_HOST'),
            "PORT": config('DATABASE_PORT'),
        }
    }


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Default primary key field type

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Experiment runner settings
FWLAB_OUTPUT_DIR = Path(config('FWLAB_OUTPUT_DIR', default=str(BASE_DIR / 'runs')))
FWLAB_THREADS = config('FWLAB_THREADS', default=1, cast=int)
# Ensemble chunking must not depend on the thread count
FWLAB_CHUNK_SIZE = config('FWLAB_CHUNK_SIZE', default=256, cast=int)
FWLAB_RECORD_RUNS = config('FWLAB_RECORD_RUNS', default=True, cast=bool)
FWLAB_LOG_LEVEL = config('FWLAB_LOG_LEVEL', default='INFO')


# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "run": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "run",
        },
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": FWLAB_LOG_LEVEL,
            "propagate": False,
        }
        for app in INSTALLED_APPS
    },
}
