"""
Django settings for the hermitia project.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/

Every hermitia knob is read from the environment (or a .env file) and passed
down to the geometry package by the command and view layers.
"""
import os
import dotenv
from pathlib import Path

dotenv.load_dotenv()


is_development = os.environ.get("ENVIRONMENT") != "production"
DOMAIN = os.environ.get("HOST") or '127.0.0.1'

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY') or 'django-insecure-hermitia-development-key-change-me'

LANGUAGE_CODE = 'en-us'
TIME_ZONE = os.environ.get('TZ') or 'UTC'
USE_I18N = True
USE_TZ = True

BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = is_development

ALLOWED_HOSTS = [
    '127.0.0.1',
    'localhost',
    'testserver',
    DOMAIN
]


# Application definition

INSTALLED_APPS = [
    'hermitia.apps.HermitiaConfig',
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'hermitia.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
            ],
        },
    },
]

WSGI_APPLICATION = 'hermitia.wsgi.application'

# nothing is persisted
DATABASES = {}

REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': ['rest_framework.renderers.JSONRenderer'],
    'DEFAULT_PARSER_CLASSES': ['rest_framework.parsers.JSONParser'],
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# hermitia

HERMITIA_THREADS = int(os.environ.get('HERMITIA_THREADS') or 1)
HERMITIA_JET_ORDER = int(os.environ.get('HERMITIA_JET_ORDER') or 3)
HERMITIA_TOL = float(os.environ.get('HERMITIA_TOL') or 1e-9)
HERMITIA_POSITIVITY_TOL = float(os.environ.get('HERMITIA_POSITIVITY_TOL') or 1e-10)
HERMITIA_CLASSIFY_TOL = float(os.environ.get('HERMITIA_CLASSIFY_TOL') or 1e-9)
HERMITIA_LOG_DIR = os.environ.get('HERMITIA_LOG_DIR') or str(BASE_DIR / 'logs')
VERBOSE = os.environ.get('VERBOSE') in ('true', 'True')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {'format': '%(asctime)s %(levelname)s %(name)s %(message)s'},
    },
    'handlers': {
        'console': {'class': 'logging.StreamHandler', 'formatter': 'plain', 'level': 'WARNING'},
        'null': {'class': 'logging.NullHandler'},
    },
    'loggers': {
        'output': {'level': 'INFO', 'handlers': ['null'], 'propagate': False},
        'data_issues': {'level': 'WARNING', 'handlers': ['null'], 'propagate': False},
        'hermitia': {
            'level': os.environ.get('HERMITIA_LOG_LEVEL') or 'WARNING',
            'handlers': ['console'],
            'propagate': False,
        },
    },
}
