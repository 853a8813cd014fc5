"""
Core app configuration for the soliton lab.
"""

import logging

from django.apps import AppConfig
from django.conf import settings

logger = logging.getLogger(__name__)


class CoreConfig(AppConfig):
    """Core app configuration."""

    name = 'apps.core'
    verbose_name = 'Core'

    def ready(self):
        """Log the numerical defaults the lab runs with."""
        logger.debug(
            f"✅ Lab {settings.LAB_VERSION} ready "
            f"(rel_tol={settings.LAB_REL_TOL}, abs_tol={settings.LAB_ABS_TOL}, "
            f"s_max={settings.LAB_S_MAX})"
        )
