"""
Test settings for pytest.
"""

from pathlib import Path

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent

# Security
SECRET_KEY = 'test-secret-key-for-pytest-only'

# Database for testing
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': ':memory:',
    }
}

# Installed apps for testing
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    # Local apps
    'apps.core',
    'apps.geometry',
    'apps.dynamics',
    'apps.integrator',
    'apps.analysis',
    'apps.lab',
]

# Django settings
DEBUG = True
USE_TZ = True
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'handlers': {
        'null': {'class': 'logging.NullHandler'},
    },
    'root': {'handlers': ['null'], 'level': 'WARNING'},
}

# Lab defaults (same values as core.settings.base)
LAB_VERSION = '0.1.0-test'
LAB_REL_TOL = 1e-10
LAB_ABS_TOL = 1e-12
LAB_MAX_STEP = float('inf')
LAB_S_MAX = 200.0
LAB_NORM_CAP = 1e8
LAB_CONVERGENCE_WINDOW = 10.0
LAB_CONVERGENCE_TOL = 1e-6
LAB_EVENT_TOL = 1e-10
LAB_SEED_DELTA = 1e-7
LAB_PROJECTION_TOL = 1e-13
LAB_PROFILE_T0_FACTOR = 1e-3
LAB_Y1_POLYNOMIAL_SWITCH = 1e-8
LAB_MATCH_TOL = 1e-6
LAB_ASYMPTOTICS_TOL = 1e-3
LAB_COMPLETENESS_T_THRESHOLD = 1e3
LAB_MONOTONE_SLACK = 1e-10
