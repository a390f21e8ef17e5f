from pathlib import Path

import dj_database_url
from decouple import Csv, config

BASE_DIR = Path(__file__).resolve().parent.parent
ENVIRONMENT = config('ENVIRONMENT', default="development")

SECRET_KEY = config('SECRET_KEY', default='django-insecure-explanation-stability-dev-key')
DEBUG = config('DEBUG', default=ENVIRONMENT == 'development', cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1,testserver', cast=Csv())

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'apps.texts',
    'apps.classifiers',
    'apps.explainers',
    'apps.similarity',
    'apps.embeddings',
    'apps.attacks',
    'apps.experiments',
    'rest_framework',
    'corsheaders',
    'django_filters'
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'corsheaders.middleware.CorsMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

# Database: SQLite unless DATABASE_URL points elsewhere (Postgres in production)
DATABASES = {
    'default': dj_database_url.parse(
        config('DATABASE_URL', default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}")
    )
}

# Static files
STATIC_URL = '/static/'
if ENVIRONMENT == 'production':
    STATIC_ROOT = BASE_DIR / 'staticfiles'

# CORS configuration
CORS_ALLOWED_ORIGINS = config(
    'CORS_ALLOWED_ORIGINS', default='http://localhost:3000,http://127.0.0.1:3000', cast=Csv()
)

# DRF settings
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': ['rest_framework.permissions.AllowAny'],
    'DEFAULT_FILTER_BACKENDS': ['django_filters.rest_framework.DjangoFilterBackend'],
}

ROOT_URLCONF = 'server.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'server.wsgi.application'

# Standard Django settings
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Explanation stability toolkit
STABILITY_DATA_DIR = Path(config('STABILITY_DATA_DIR', default=str(BASE_DIR / 'data')))
STABILITY_MODEL_PATH = config('STABILITY_MODEL_PATH', default=str(STABILITY_DATA_DIR / 'short.model'))
STABILITY_EMBEDDINGS_PATH = config(
    'STABILITY_EMBEDDINGS_PATH', default=str(STABILITY_DATA_DIR / 'embeddings.txt')
)

TRAINING_DEFAULTS = {
    'epochs': config('TRAINING_EPOCHS', default=500, cast=int),
    'step_size': config('TRAINING_STEP_SIZE', default=0.1, cast=float),
    'l2': config('TRAINING_L2', default=1e-4, cast=float),
    'seed': 0,
}

EXPLAINER_DEFAULTS = {
    'n': config('EXPLAINER_SAMPLES', default=500, cast=int),
    'mask_rate': config('EXPLAINER_MASK_RATE', default=0.3, cast=float),
    'm': config('EXPLAINER_FEATURES', default=10, cast=int),
    'kernel_width': config('EXPLAINER_KERNEL_WIDTH', default=0.25, cast=float),
}

ATTACK_DEFAULTS = {
    'measure': config('ATTACK_MEASURE', default='rbo05'),
    'tau': config('ATTACK_TAU', default=0.5, cast=float),
    'delta': config('ATTACK_DELTA', default=0.8, cast=float),
    'epsilon': config('ATTACK_EPSILON', default=0.3, cast=float),
    'k': config('ATTACK_TOPK', default=1, cast=int),
    'j': config('ATTACK_NEIGHBORS', default=20, cast=int),
    'min_cos': config('ATTACK_MIN_COS', default=0.5, cast=float),
    'seed': 0,
    'ga_population': config('ATTACK_POPULATION', default=10, cast=int),
    'ga_generations': config('ATTACK_GENERATIONS', default=10, cast=int),
    'strict_semantic': config('ATTACK_STRICT_SEMANTIC', default=False, cast=bool),
}

# Logging
LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
