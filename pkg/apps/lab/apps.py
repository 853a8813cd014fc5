"""
Django app configuration for the Lab app.
"""

from django.apps import AppConfig


class LabConfig(AppConfig):
    """
    Command-line front end: management commands, run configuration and writers.
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.lab'
    verbose_name = 'Lab'
