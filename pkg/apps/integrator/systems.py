"""
Dynamical systems the integrator can step.

Each system adapts one vector field from apps.dynamics.fields: it fixes the
state layout, the event functions, the monitored residuals and the
components used by the blow-up guard and the convergence detector.
"""

import math

import numpy as np
from django.conf import settings

from apps.core.exceptions import ConfigurationError, DomainExitError
from apps.dynamics import fields
from apps.dynamics.states import MultiState, PolynomialState
from apps.integrator.events import EventKind, EventSpec


class DynamicalSystem:
    """Base class; subclasses set `name` and `names` and implement rhs()."""

    name = 'custom'
    names = ()

    def __init__(self, params=None):
        self.params = params

    def prepare(self, state):
        """Initial vector for a state object or array."""
        if hasattr(state, 'to_vector'):
            return np.asarray(state.to_vector(), dtype=float)
        return np.asarray(state, dtype=float)

    def rhs(self, s, y):
        raise NotImplementedError

    def events(self):
        return []

    def residuals(self, y):
        return {}

    @property
    def phase_indices(self):
        return tuple(range(len(self.names)))

    @property
    def convergence_indices(self):
        return self.phase_indices

    def _index(self, name):
        return self.names.index(name)


def _carries_bounded_l(params):
    """L stays bounded unless the run is Ricci-flat (eps = 0 and C = 0)."""
    return not (params.epsilon == 0 and params.C == 0)


class RescaledSystem(DynamicalSystem):
    """
    Rescaled two-summands system. W = Y2^2/Y1 is carried along and replaces
    Y2^4/Y1^2 once Y1 drops below LAB_Y1_POLYNOMIAL_SWITCH.
    """

    name = 'rescaled'
    names = PolynomialState.NAMES
    always_polynomial = False

    def __init__(self, params, switch=None):
        super().__init__(params)
        self.switch = settings.LAB_Y1_POLYNOMIAL_SWITCH if switch is None else switch

    def prepare(self, state):
        if isinstance(state, PolynomialState):
            return state.to_vector()
        if hasattr(state, 'to_vector'):
            y = state.to_vector()
        else:
            y = np.asarray(state, dtype=float)
            if len(y) == len(self.names):
                return y
        if not y[2] > 0:
            raise DomainExitError("initial Y1 must be positive", Y1=y[2])
        return np.append(y[:7], y[3] ** 2 / y[2])

    def _use_w(self, y):
        return self.always_polynomial or y[2] < self.switch

    def rhs(self, s, y):
        return fields.polynomial_field(self.params, y, use_w=self._use_w(y))

    def events(self):
        return [
            EventSpec(EventKind.X2_ZERO, lambda y: y[1]),
            EventSpec(EventKind.OMEGA_CRITICAL, lambda y: y[0] - y[1]),
        ]

    def residuals(self, y):
        w = y[7] if self._use_w(y) else None
        S1, S2 = fields.locus(self.params, y, w=w)
        return {
            'conservation': fields.rescaled_conservation(self.params, y, w=w),
            'S1': S1,
            'S2': S2,
        }

    @property
    def phase_indices(self):
        return (0, 1, 2, 3, 4) if _carries_bounded_l(self.params) else (0, 1, 2, 3)


class PolynomialSystem(RescaledSystem):
    """The W-augmented form throughout."""

    name = 'polynomial'
    always_polynomial = True


class HatSystem(DynamicalSystem):
    """Unrescaled Einstein system; valid across hL = 0."""

    name = 'hat'
    names = ('hX1', 'hX2', 'hY1', 'hY2', 'hL')

    def __init__(self, params, collapse_floor=None):
        super().__init__(params)
        self.collapse_floor = collapse_floor

    def prepare(self, state):
        y = super().prepare(state)
        if self.collapse_floor is None:
            self.collapse_floor = 1e-3 / max(y[2], y[3])
        return y

    def rhs(self, s, y):
        return fields.hat_field(self.params, y)

    def events(self):
        floor = self.collapse_floor
        return [
            EventSpec(EventKind.MAX_VOLUME_ORBIT, lambda y: y[4], direction=-1),
            EventSpec(EventKind.OMEGA_CRITICAL, lambda y: y[0] - y[1]),
            EventSpec(
                EventKind.COLLAPSE,
                lambda y: min(1 / y[2], 1 / y[3]) - floor,
                direction=-1,
                terminal=True,
            ),
        ]

    def residuals(self, y):
        return {
            'conservation': fields.hat_conservation(self.params, y),
            'constraint': fields.hat_constraint(self.params, y),
        }

    @property
    def convergence_indices(self):
        return ()


class ProfileSystem(DynamicalSystem):
    """Warping-function system in geometric time t."""

    name = 'profile'
    names = ('f1', 'df1', 'f2', 'df2', 'u', 'du')

    def __init__(self, params, mode='einstein', m=math.inf, collapse_floor=None):
        super().__init__(params)
        if mode not in ('einstein', 'soliton'):
            raise ConfigurationError(f"unknown profile mode {mode!r}")
        self.einstein = mode == 'einstein'
        self.m = m
        self.collapse_floor = collapse_floor

    def prepare(self, state):
        y = super().prepare(state)
        if self.collapse_floor is None:
            self.collapse_floor = 1e-3 * min(y[0], y[2])
        return y

    def rhs(self, s, y):
        return fields.profile_field(self.params, y, einstein=self.einstein, m=self.m)

    def trace_l(self, y):
        return self.params.d1 * y[1] / y[0] + self.params.d2 * y[3] / y[2]

    def events(self):
        floor = self.collapse_floor
        return [
            EventSpec(
                EventKind.MAX_VOLUME_ORBIT,
                lambda y: self.trace_l(y) - (0.0 if self.einstein else y[5]),
                direction=-1,
            ),
            EventSpec(EventKind.OMEGA_CRITICAL, lambda y: y[1] / y[0] - y[3] / y[2]),
            EventSpec(EventKind.F2_CRITICAL, lambda y: y[3]),
            EventSpec(EventKind.COLLAPSE, lambda y: min(y[0], y[2]) - floor, direction=-1, terminal=True),
        ]

    def residuals(self, y):
        if not self.einstein or not (y[0] > 0 and y[2] > 0):
            return {}
        hat = np.array(
            [y[1] / y[0], y[3] / y[2], 1 / y[0], 1 / y[2], self.trace_l(y)]
        )
        # scaled by f1^2 so the singular start does not dominate
        return {'conservation': fields.hat_conservation(self.params, hat) * y[0] ** 2}

    @property
    def phase_indices(self):
        return (0, 1, 2, 3)

    @property
    def convergence_indices(self):
        return ()


class PlanarSystem(DynamicalSystem):
    """(X1, Y1, L) on the Einstein locus."""

    name = 'planar'
    names = ('X1', 'Y1', 'L')

    def prepare(self, state):
        if hasattr(state, 'X2') and hasattr(state, 'Y2'):
            return np.array([state.X1, state.Y1, state.L], dtype=float)
        return super().prepare(state)

    def rhs(self, s, y):
        return fields.planar_field(self.params, y)

    def events(self):
        target = 1 / self.params.n
        return [EventSpec(EventKind.OMEGA_CRITICAL, lambda y: y[0] - target)]

    @property
    def phase_indices(self):
        return (0, 1) if self.params.epsilon == 0 else (0, 1, 2)


class MultiSystem(DynamicalSystem):
    name = 'multi'

    def __init__(self, params):
        super().__init__(params)
        self.names = MultiState.names(params.size)

    def rhs(self, s, y):
        return fields.multi_field(self.params, y)

    def residuals(self, y):
        return {
            'conservation': fields.multi_conservation(self.params, y),
            'constraint': fields.multi_constraint(self.params, y),
        }

    @property
    def phase_indices(self):
        k = self.params.size
        indices = tuple(range(2 * k))
        return indices if self.params.epsilon == 0 else indices + (2 * k,)


class QuasiSystem(DynamicalSystem):
    """Three-summand m-quasi-Einstein system."""

    name = 'quasi'
    names = ('X1', 'X2', 'X3', 'Y1', 'Y2', 'Y3', 'L', 't', 'u')

    def rhs(self, s, y):
        return fields.quasi_field(self.params, y)

    def events(self):
        return [
            EventSpec(EventKind.X2_ZERO, lambda y: y[1]),
            EventSpec(EventKind.OMEGA_CRITICAL, lambda y: y[0] - y[1]),
        ]

    def residuals(self, y):
        return {
            'conservation': fields.quasi_conservation(self.params, y),
            'constraint': fields.quasi_constraint(self.params, y),
        }

    @property
    def phase_indices(self):
        bounded_l = self.params.epsilon != 0 or self.params.A3 != 0
        return (0, 1, 2, 3, 4, 5, 6) if bounded_l else (0, 1, 2, 3, 4, 5)


SYSTEMS = {
    system.name: system
    for system in (
        RescaledSystem,
        PolynomialSystem,
        HatSystem,
        ProfileSystem,
        PlanarSystem,
        MultiSystem,
        QuasiSystem,
    )
}


def build_system(name, params, **options):
    """Instantiate a registered system by name."""
    try:
        system_class = SYSTEMS[name]
    except KeyError:
        choices = "|".join(SYSTEMS)
        raise ConfigurationError(f"unknown system {name!r}, expected one of {choices}")
    return system_class(params, **options)
