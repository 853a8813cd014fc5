"""
Utility functions for number formatting and validation plumbing.
"""

import math
from fractions import Fraction

from django.core.exceptions import ValidationError

from apps.core.exceptions import ConfigurationError


def format_float(value):
    """
    Format a float with 17 significant digits.

    Used for every number written to CSV so repeated runs give identical bytes.
    """
    return format(float(value), '.17g')


def shortest_float(value):
    """Shortest round-trip representation, with JSON-safe infinities."""
    number = float(value)
    if math.isnan(number):
        return "NaN"
    if math.isinf(number):
        return "Infinity" if number > 0 else "-Infinity"
    return number


def exact_rational(value):
    """
    Return value as a Fraction when it is integral, else None.

    Preset-derived constants are integers, so exact arithmetic is possible for them.
    """
    if isinstance(value, Fraction):
        return value
    number = float(value)
    if math.isfinite(number) and number.is_integer():
        return Fraction(int(number))
    return None


def display_rational(value, max_denominator=10000):
    """Human-friendly rendering of a float that is close to a small rational."""
    number = float(value)
    if not math.isfinite(number):
        return str(number)
    approx = Fraction(number).limit_denominator(max_denominator)
    if abs(float(approx) - number) <= 1e-12 * max(1.0, abs(number)):
        return str(approx)
    return format(number, '.10g')


def run_validators(value, validators):
    """Run ValidationError validators, re-raising as ConfigurationError."""
    try:
        for validator in validators:
            result = validator(value)
            if result is not None:
                value = result
    except ValidationError as exc:
        raise ConfigurationError("; ".join(exc.messages)) from exc
    return value
