"""
Django app configuration for the Integrator app.
"""

from django.apps import AppConfig


class IntegratorConfig(AppConfig):
    """
    Adaptive integration, event location and seeding.
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.integrator'
    verbose_name = 'Integrator'
