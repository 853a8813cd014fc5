"""
Result types produced by the analysis services.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from apps.core.utils import shortest_float


class Regime(str, enum.Enum):
    STEADY = 'steady'
    RICCI_FLAT = 'ricciflat'
    EXPANDING = 'expanding'
    NEGATIVE_EINSTEIN = 'negEinstein'


class Verdict(str, enum.Enum):
    COMPLETE_EVIDENCE = 'CompleteEvidence'
    INCONCLUSIVE = 'Inconclusive'


@dataclass(frozen=True)
class AsymptoticsReport:
    """
    Trailing-window means against the limits of one asymptotic regime.

    Every entry of `passed` is |observed - target| < tolerance for the
    variable of the same name.
    """

    regime: Regime
    observed: dict
    targets: dict
    passed: dict
    tolerance: float
    horizon: float
    window: float
    monitors: dict = field(default_factory=dict)

    @property
    def all_passed(self):
        return all(self.passed.values())

    def failures(self):
        return [name for name, ok in self.passed.items() if not ok]

    def as_dict(self):
        return {
            'regime': self.regime.value,
            'observed': {name: shortest_float(value) for name, value in self.observed.items()},
            'targets': {name: shortest_float(value) for name, value in self.targets.items()},
            'passed': dict(self.passed),
            'tolerance': self.tolerance,
            'horizon': shortest_float(self.horizon),
            'window': self.window,
            'monitors': {name: shortest_float(value) for name, value in self.monitors.items()},
        }


@dataclass(frozen=True)
class MatchResult:
    """A gluing of two profile trajectories at their maximal volume orbits."""

    fbar: float
    Fbar: float
    t0: float
    t1: float
    T1: float
    residual: float
    continuity: float = math.nan

    def as_dict(self):
        return {
            'fbar': shortest_float(self.fbar),
            'Fbar': shortest_float(self.Fbar),
            't0': shortest_float(self.t0),
            't1': shortest_float(self.t1),
            'T1': shortest_float(self.T1),
            'residual': shortest_float(self.residual),
            'continuity': shortest_float(self.continuity),
        }


@dataclass(frozen=True)
class SymmetricSolution:
    """Profile whose warping functions are both critical at the maximal volume orbit."""

    fbar: float
    t_max_volume: float
    residual: float
    critical_count: int

    def as_dict(self):
        return {
            'fbar': shortest_float(self.fbar),
            't_max_volume': shortest_float(self.t_max_volume),
            'residual': shortest_float(self.residual),
            'critical_count': self.critical_count,
        }


@dataclass(frozen=True)
class MetricProfile:
    """Warping functions, potential and scalar curvature on a monotone t grid."""

    t: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    df1: np.ndarray
    df2: np.ndarray
    u: np.ndarray
    du: np.ndarray
    R: np.ndarray

    def __len__(self):
        return len(self.t)

    @property
    def columns(self):
        return ('t', 'f1', 'f2', 'df1', 'df2', 'u', 'du', 'R')

    def rows(self):
        return np.column_stack([getattr(self, name) for name in self.columns])


@dataclass(frozen=True)
class CompletenessReport:
    verdict: Verdict
    t_end: float
    growth_rate: float
    checks: dict
    reason: str = ''

    def as_dict(self):
        return {
            'verdict': self.verdict.value,
            't_end': shortest_float(self.t_end),
            'growth_rate': shortest_float(self.growth_rate),
            'checks': dict(self.checks),
            'reason': self.reason,
        }


@dataclass(frozen=True)
class MonotoneCheck:
    """Sample-to-sample monotonicity of one quantity; worst_violation is 0 when it holds."""

    name: str
    holds: bool
    worst_violation: float
    samples: int

    def as_dict(self):
        return {
            'name': self.name,
            'holds': self.holds,
            'worst_violation': shortest_float(self.worst_violation),
            'samples': self.samples,
        }
