"""
Domain exceptions for the soliton lab.

Every error carries the process exit code the management commands report.
"""


class LabError(Exception):
    """Base class for all lab errors."""

    exit_code = 1

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def __str__(self):
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} ({details})"


class ConfigurationError(LabError):
    """Invalid preset, invalid parameters or contradictory run configuration."""

    exit_code = 64


class OutputError(LabError):
    """Output file could not be written."""

    exit_code = 74


class DomainExitError(LabError):
    """A vector field was evaluated outside its domain of definition."""

    exit_code = 3


class BlowUpError(LabError):
    exit_code = 2


class NotApplicableError(LabError):
    """A derived quantity is undefined for the given parameters."""

    exit_code = 64


class SeedingError(LabError):
    exit_code = 64


class IntegrationError(LabError):
    """Step size underflow. Keeps the last accepted state."""

    def __init__(self, message, s=None, state=None, **context):
        super().__init__(message, **context)
        self.s = s
        self.state = state


class SearchError(LabError):
    exit_code = 65


class InconsistencyError(LabError):
    """An internal residual check failed."""

    exit_code = 70
