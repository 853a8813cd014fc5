"""
Phase-space state types.

States are value objects; the integrator works on the flat vectors returned
by to_vector() and rebuilds states with from_vector().
"""

from dataclasses import astuple, dataclass, field
from typing import ClassVar

import numpy as np

from apps.core.exceptions import ConfigurationError


class VectorState:
    """Mixin for flat-vector conversions of fixed-layout states."""

    NAMES: ClassVar[tuple] = ()

    def to_vector(self):
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_vector(cls, y):
        return cls(*(float(value) for value in y[: len(cls.NAMES)]))

    def as_dict(self):
        return dict(zip(self.NAMES, astuple(self)))


@dataclass(frozen=True)
class PhaseState(VectorState):
    """Rescaled variables plus the (t, u) quadratures."""

    X1: float
    X2: float
    Y1: float
    Y2: float
    L: float
    t: float = 0.0
    u: float = 0.0

    NAMES: ClassVar[tuple] = ('X1', 'X2', 'Y1', 'Y2', 'L', 't', 'u')

    def validate(self):
        """Y2 -> -Y2 is a symmetry; only the Y2 >= 0 half is admitted."""
        if not self.Y1 > 0:
            raise ConfigurationError("Y1 must be positive", Y1=self.Y1)
        if self.Y2 < 0:
            raise ConfigurationError("Y2 must be nonnegative", Y2=self.Y2)
        if self.L < 0:
            raise ConfigurationError("L must be nonnegative", L=self.L)
        return self

    @property
    def omega(self):
        return self.Y2 / self.Y1


@dataclass(frozen=True)
class PolynomialState(PhaseState):
    """PhaseState with the auxiliary W = Y2^2/Y1."""

    W: float = 0.0

    NAMES: ClassVar[tuple] = PhaseState.NAMES + ('W',)

    @classmethod
    def from_phase(cls, state):
        return cls(*astuple(state), W=state.Y2**2 / state.Y1)

    def to_phase(self):
        return PhaseState(*astuple(self)[:7])


@dataclass(frozen=True)
class HatState(VectorState):
    """Unrescaled variables; hL = -du/dt + tr L changes sign at the maximal volume orbit."""

    hX1: float
    hX2: float
    hY1: float
    hY2: float
    hL: float

    NAMES: ClassVar[tuple] = ('hX1', 'hX2', 'hY1', 'hY2', 'hL')


@dataclass(frozen=True)
class ProfileState(VectorState):
    """Warping functions f1, f2, the potential u and their t-derivatives."""

    f1: float
    df1: float
    f2: float
    df2: float
    u: float = 0.0
    du: float = 0.0

    NAMES: ClassVar[tuple] = ('f1', 'df1', 'f2', 'df2', 'u', 'du')

    def trace_l(self, d1, d2):
        """Mean curvature d1 f1'/f1 + d2 f2'/f2 of the principal orbit."""
        return d1 * self.df1 / self.f1 + d2 * self.df2 / self.f2


@dataclass(frozen=True)
class PlanarState(VectorState):
    """Einstein-locus reduction: X2 and Y2 are eliminated."""

    X1: float
    Y1: float
    L: float = 0.0

    NAMES: ClassVar[tuple] = ('X1', 'Y1', 'L')


@dataclass(frozen=True)
class MultiState:
    """Multi-warped state; X and Y have one entry per factor (virtual fiber last)."""

    X: tuple
    Y: tuple
    L: float
    t: float = 0.0
    u: float = 0.0

    @staticmethod
    def names(size):
        return (
            tuple(f'X{i + 1}' for i in range(size))
            + tuple(f'Y{i + 1}' for i in range(size))
            + ('L', 't', 'u')
        )

    def to_vector(self):
        return np.concatenate([self.X, self.Y, [self.L, self.t, self.u]]).astype(float)

    @classmethod
    def from_vector(cls, y, size):
        y = np.asarray(y, dtype=float)
        return cls(
            X=tuple(y[:size]),
            Y=tuple(y[size : 2 * size]),
            L=float(y[2 * size]),
            t=float(y[2 * size + 1]),
            u=float(y[2 * size + 2]),
        )


@dataclass(frozen=True)
class QuasiState(VectorState):
    """Three-summand quasi-Einstein state; the third factor is the virtual fiber."""

    X1: float
    X2: float
    X3: float
    Y1: float
    Y2: float
    Y3: float
    L: float
    t: float = 0.0
    u: float = 0.0

    NAMES: ClassVar[tuple] = ('X1', 'X2', 'X3', 'Y1', 'Y2', 'Y3', 'L', 't', 'u')


@dataclass(frozen=True)
class Functionals:
    """Lyapunov functionals and monitors evaluated at one state."""

    K: float
    Ktilde: float
    F0: float
    G: float
    mean_curvature: float
    F0_infinite: bool = field(default=False)
