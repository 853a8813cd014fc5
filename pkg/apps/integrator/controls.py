"""
Integration controls and shooting specifications.
"""

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from django.conf import settings

from apps.core.exceptions import SeedingError
from apps.core.utils import run_validators
from apps.core.validators import FiniteRealValidator, ToleranceValidator, validate_delta


@dataclass(frozen=True)
class IntegrationControls:
    """Tolerances, horizon and guards for one integration."""

    rel_tol: float
    abs_tol: float
    max_step: float
    s_max: float
    norm_cap: float
    convergence_window: float
    convergence_tol: float
    event_tol: float
    detect_convergence: bool = True

    def __post_init__(self):
        run_validators(self.rel_tol, [ToleranceValidator('rel_tol')])
        run_validators(self.abs_tol, [ToleranceValidator('abs_tol')])
        for name in ('max_step', 'norm_cap', 'convergence_window', 'convergence_tol', 'event_tol'):
            run_validators(
                getattr(self, name),
                [FiniteRealValidator(name, positive=True, allow_infinite=(name == 'max_step'))],
            )
        run_validators(self.s_max, [FiniteRealValidator('s_max')])

    @classmethod
    def from_settings(cls, **overrides):
        """Defaults from the LAB_* settings; None overrides are ignored."""
        values = {
            'rel_tol': settings.LAB_REL_TOL,
            'abs_tol': settings.LAB_ABS_TOL,
            'max_step': settings.LAB_MAX_STEP,
            's_max': settings.LAB_S_MAX,
            'norm_cap': settings.LAB_NORM_CAP,
            'convergence_window': settings.LAB_CONVERGENCE_WINDOW,
            'convergence_tol': settings.LAB_CONVERGENCE_TOL,
            'event_tol': settings.LAB_EVENT_TOL,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def updated(self, **changes):
        return replace(self, **{key: value for key, value in changes.items() if value is not None})

    def tightened(self, factor=2.0):
        """Both tolerances divided by factor, floored at the admissible minimum."""
        floor = ToleranceValidator.floor
        return replace(
            self,
            rel_tol=max(self.rel_tol / factor, floor),
            abs_tol=max(self.abs_tol / factor, floor),
        )

    def as_dict(self):
        values = asdict(self)
        if math.isinf(values['max_step']):
            values['max_step'] = 'inf'
        return values


class Locus(str, enum.Enum):
    EINSTEIN = 'einstein'
    SOLITON = 'soliton'
    UNCONSTRAINED = 'unconstrained'


@dataclass(frozen=True)
class ShootSpec:
    """
    Direction in the unstable eigenbasis (2/d1 direction, Y2, L) of the
    initial critical point, the displacement and the target locus.
    Coefficients are normalized on construction.
    """

    coefficients: tuple
    delta: float = None
    locus: Locus = Locus.EINSTEIN

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        if coefficients.shape != (3,):
            raise SeedingError("shoot coefficients need three entries (a, b, l)", got=len(coefficients))
        norm = float(np.linalg.norm(coefficients))
        if not norm > 0:
            raise SeedingError("coefficients are orthogonal to the unstable space")
        object.__setattr__(self, 'coefficients', tuple(float(c) / norm for c in coefficients))

        delta = settings.LAB_SEED_DELTA if self.delta is None else float(self.delta)
        if delta == 0:
            raise SeedingError("seed must be displaced from the critical point")
        object.__setattr__(self, 'delta', run_validators(delta, [validate_delta]))
        object.__setattr__(self, 'locus', Locus(self.locus))

    def as_dict(self):
        return {'coefficients': list(self.coefficients), 'delta': self.delta, 'locus': self.locus.value}
