"""
Custom validators for the soliton lab.

Validators are callables raising ValidationError, shared by the parameter
dataclasses and the command-line run configuration.
"""

import math

from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


class PositiveIntegerValidator:
    """Validator for dimensions and family indices."""

    def __init__(self, name, minimum=1):
        self.name = name
        self.minimum = minimum

    def __call__(self, value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(
                _("%(name)s must be an integer, got %(value)r."),
                params={'name': self.name, 'value': value},
            )
        if value < self.minimum:
            raise ValidationError(
                _("%(name)s must be at least %(minimum)s, got %(value)s."),
                params={'name': self.name, 'minimum': self.minimum, 'value': value},
            )
        return value


class FiniteRealValidator:
    """Validator for real parameters with optional sign constraints."""

    def __init__(self, name, positive=False, nonnegative=False, allow_infinite=False):
        self.name = name
        self.positive = positive
        self.nonnegative = nonnegative
        self.allow_infinite = allow_infinite

    def __call__(self, value):
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ValidationError(
                _("%(name)s must be a real number, got %(value)r."),
                params={'name': self.name, 'value': value},
            )

        if math.isnan(number) or (math.isinf(number) and not self.allow_infinite):
            raise ValidationError(
                _("%(name)s must be finite, got %(value)s."),
                params={'name': self.name, 'value': value},
            )
        if self.positive and number <= 0:
            raise ValidationError(
                _("%(name)s must be positive, got %(value)s."),
                params={'name': self.name, 'value': value},
            )
        if self.nonnegative and number < 0:
            raise ValidationError(
                _("%(name)s must be nonnegative, got %(value)s."),
                params={'name': self.name, 'value': value},
            )
        return number


class RangeValidator:
    """Validator for a closed interval, e.g. seed displacements."""

    def __init__(self, name, lower, upper):
        self.name = name
        self.lower = lower
        self.upper = upper

    def __call__(self, value):
        if not self.lower <= value <= self.upper:
            raise ValidationError(
                _("%(name)s must lie in [%(lower)s, %(upper)s], got %(value)s."),
                params={
                    'name': self.name,
                    'lower': self.lower,
                    'upper': self.upper,
                    'value': value,
                },
            )
        return value


class ToleranceValidator:
    """Integration tolerances below the double precision floor are rejected."""

    floor = 1e-14

    def __init__(self, name):
        self.name = name

    def __call__(self, value):
        if not value >= self.floor:
            raise ValidationError(
                _("%(name)s must be at least %(floor)s, got %(value)s."),
                params={'name': self.name, 'floor': self.floor, 'value': value},
            )
        return value


validate_delta = RangeValidator('delta', 1e-10, 1e-3)
