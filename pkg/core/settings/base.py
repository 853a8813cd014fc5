"""
Django base settings for the soliton lab.
"""

import os
from pathlib import Path

import environ  # type: ignore

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Initialize environment FIRST - before any usage
env = environ.Env()

# Load environment-specific .env file from home directory
DJANGO_ENV = os.environ.get('DJANGO_ENV', 'development')
env_file = os.path.expanduser(f"~/.env.{DJANGO_ENV}")
if os.path.exists(env_file):
    environ.Env.read_env(env_file)
else:
    # Fallback to .env in project directory
    environ.Env.read_env(os.path.join(BASE_DIR, ".env"))

# Secret key (unused by the lab, required by Django)
SECRET_KEY = env("SECRET_KEY", default="django-insecure-lab-key")

# Application definition
INSTALLED_APPS = [
    "django.contrib.contenttypes",
    # Local apps
    "apps.core",
    "apps.geometry",
    "apps.dynamics",
    "apps.integrator",
    "apps.analysis",
    "apps.lab",
]

# The lab keeps no persistent state
DATABASES = {}

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Tool version embedded in every output file
LAB_VERSION = env("LAB_VERSION", default="0.1.0")

# Integration controls
LAB_REL_TOL = env.float("LAB_REL_TOL", default=1e-10)
LAB_ABS_TOL = env.float("LAB_ABS_TOL", default=1e-12)
LAB_MAX_STEP = env.float("LAB_MAX_STEP", default=float("inf"))
LAB_S_MAX = env.float("LAB_S_MAX", default=200.0)
LAB_NORM_CAP = env.float("LAB_NORM_CAP", default=1e8)
LAB_CONVERGENCE_WINDOW = env.float("LAB_CONVERGENCE_WINDOW", default=10.0)
LAB_CONVERGENCE_TOL = env.float("LAB_CONVERGENCE_TOL", default=1e-6)
LAB_EVENT_TOL = env.float("LAB_EVENT_TOL", default=1e-10)

# Seeding at the singular orbit
LAB_SEED_DELTA = env.float("LAB_SEED_DELTA", default=1e-7)
LAB_PROJECTION_TOL = env.float("LAB_PROJECTION_TOL", default=1e-13)
LAB_PROFILE_T0_FACTOR = env.float("LAB_PROFILE_T0_FACTOR", default=1e-3)

# Below this Y1 the rescaled field is evaluated in its polynomial form
LAB_Y1_POLYNOMIAL_SWITCH = env.float("LAB_Y1_POLYNOMIAL_SWITCH", default=1e-8)

# Analysis
LAB_MATCH_TOL = env.float("LAB_MATCH_TOL", default=1e-6)
LAB_ASYMPTOTICS_TOL = env.float("LAB_ASYMPTOTICS_TOL", default=1e-3)
LAB_COMPLETENESS_T_THRESHOLD = env.float("LAB_COMPLETENESS_T_THRESHOLD", default=1e3)
LAB_MONOTONE_SLACK = env.float("LAB_MONOTONE_SLACK", default=1e-10)
