"""
Events and trajectories produced by the integrator.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class EventKind(str, enum.Enum):
    X2_ZERO = 'X2Zero'
    OMEGA_CRITICAL = 'OmegaCritical'
    MAX_VOLUME_ORBIT = 'MaxVolumeOrbit'
    F2_CRITICAL = 'F2Critical'
    COLLAPSE = 'Collapse'
    BLOW_UP = 'BlowUp'
    CONVERGED = 'Converged'
    DOMAIN_EXIT = 'DomainExit'
    HORIZON_REACHED = 'HorizonReached'


TERMINAL_KINDS = frozenset(
    {EventKind.COLLAPSE, EventKind.BLOW_UP, EventKind.CONVERGED, EventKind.DOMAIN_EXIT}
)


@dataclass(frozen=True)
class EventSpec:
    """An event function g(y); crossings of g = 0 in the given direction are located."""

    kind: EventKind
    function: Callable
    direction: int = 0
    terminal: bool = False


@dataclass(frozen=True)
class Event:
    """A located event with the interpolated state at s."""

    kind: EventKind
    s: float
    state: np.ndarray
    slope: float = math.nan

    def to_dict(self, names):
        """Convert event to dictionary for serialization."""
        return {
            'kind': self.kind.value,
            's': float(self.s),
            'state': {name: float(value) for name, value in zip(names, self.state)},
        }


@dataclass(frozen=True)
class Trajectory:
    """
    Accepted samples of one integration, strictly increasing in s.

    residuals maps each monitored quantity to its per-sample values.
    """

    params: object
    system: str
    names: tuple
    s: np.ndarray
    y: np.ndarray
    events: tuple
    termination: EventKind
    residuals: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.s)

    def column(self, name):
        return self.y[:, self.names.index(name)]

    @property
    def final_s(self):
        return float(self.s[-1])

    @property
    def final_state(self):
        return self.y[-1]

    @property
    def worst(self):
        """Worst absolute value of every monitored residual."""
        return {
            name: float(np.nanmax(np.abs(values))) if len(values) else 0.0
            for name, values in self.residuals.items()
        }

    def events_of(self, kind):
        kind = EventKind(kind)
        return [event for event in self.events if event.kind is kind]

    def first_event(self, kind):
        matches = self.events_of(kind)
        return matches[0] if matches else None

    def trailing(self, window):
        """Mask of the samples inside the trailing window of length `window` in s."""
        return self.s >= self.s[-1] - window
