"""
Django app configuration for the Geometry app.
"""

from django.apps import AppConfig


class GeometryConfig(AppConfig):
    """
    Parameter sets, Hopf-fibration presets and derived algebra.
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.geometry'
    verbose_name = 'Geometry'
