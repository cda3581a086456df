"""
Django settings for splitflow project.
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='unsafe-secret-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',

    'rest_framework',
    'spectral_model',
    'gamma_calculus',
    'path_sim',
    'norms_stats',
    'rate_lab',
    'counterexample',
    'cli',
]

# Sin tablas propias: SQLite solo para que el tooling de Django funcione
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'es'

TIME_ZONE = 'America/La_Paz'

USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# ---------------- Experimentos ----------------
# semilla del entorno; None deja la del archivo o la por defecto
SPLITFLOW_SEED = config('SPLITFLOW_SEED', default=None)
SPLITFLOW_DEFAULT_SEED = 20240601
SPLITFLOW_THREADS = config('SPLITFLOW_THREADS', cast=int, default=1)
SPLITFLOW_OUT_DIR = config('SPLITFLOW_OUT_DIR', default=str(BASE_DIR / 'out'))

SPLITFLOW = {
    # bandas de aceptación para pendientes (determinista / Monte Carlo)
    "MS_SLOPE_TOL": 0.05,
    "MC_SLOPE_TOL": 0.10,
    # malla espacial para reconstruir el campo (x_i = i/P)
    "SPATIAL_GRID": 512,
    # m = R * n_max
    "REFINEMENT": 4,
    # celdas con |λ|·h por debajo de esto usan Gauss-Legendre en vez de la forma cerrada
    "SMALL_EXPONENT": 0.5,
    "QUAD_LIMIT": 200,
    # tamaño máximo (en floats) de un bloque de trabajo del contraejemplo
    "FIELD_BLOCK": 4_000_000,
    "HEAT_SLOPE_TOL": 0.10,
    # r² mínimo para que `fit` reporte pass
    "FIT_MIN_R2": 0.9,
    "CSV_SCHEMA": "splitflow-v1",
}


# ---------------- Logging ----------------
LOG_LEVEL = config('SPLITFLOW_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'splitflow': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'spectral_model': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'gamma_calculus': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'path_sim': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'norms_stats': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'rate_lab': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'counterexample': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'cli': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
    },
}
