"""
Development settings for the soliton lab.

Verbose console logging for interactive runs; set LAB_LOG_FILE to keep a
copy of every run's log next to its output.
"""

from .base import *

DEBUG = True

LAB_LOG_FILE = env("LAB_LOG_FILE", default=None)

_handlers = ["console"] + (["run_file"] if LAB_LOG_FILE else [])

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {message}",
            "style": "{",
        },
        "simple": {
            "format": "{levelname} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        **(
            {
                "run_file": {
                    "class": "logging.FileHandler",
                    "filename": LAB_LOG_FILE,
                    "formatter": "verbose",
                }
            }
            if LAB_LOG_FILE
            else {}
        ),
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        "apps": {
            "handlers": _handlers,
            "level": env("LAB_LOG_LEVEL", default="INFO"),
            "propagate": False,
        },
        # bracket subdivision and rejected candidates
        "apps.analysis": {
            "handlers": _handlers,
            "level": env("LAB_ANALYSIS_LOG_LEVEL", default="DEBUG"),
            "propagate": False,
        },
    },
}
