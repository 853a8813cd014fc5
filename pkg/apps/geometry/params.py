"""
Parameter sets for the cohomogeneity-one two-summands systems.

A parameter set fully determines one vector field: the soliton constant
epsilon and the integrability constant C live here, not on trajectories.
Sweeps clone parameter sets with dataclasses.replace.
"""

import enum
import math
from dataclasses import asdict, dataclass, replace

from apps.core.exceptions import ConfigurationError, NotApplicableError
from apps.core.utils import run_validators
from apps.core.validators import FiniteRealValidator, PositiveIntegerValidator


class PresetName(str, enum.Enum):
    """Hopf-fibration families, addressable by lower-case name."""

    CP = 'cp'
    HP = 'hp'
    F = 'f'
    CAP = 'cap'

    @property
    def label(self):
        return {'cp': 'CP', 'hp': 'HP', 'f': 'F', 'cap': 'CaP'}[self.value]


class Branch(str, enum.Enum):
    FIRST = 'first'
    SECOND = 'second'


class StabilityClass(str, enum.Enum):
    SPIRAL = 'Spiral'
    NODE = 'Node'


@dataclass(frozen=True)
class TwoSummandsParams:
    """
    Geometric constants of one two-summands ODE instance.

    d1 is the dimension of the collapsing sphere, d2 the dimension of the
    singular orbit. With sphere_collapse set, A1 = d1(d1-1) is enforced.
    """

    d1: int
    d2: int
    A1: float
    A2: float
    A3: float = 0.0
    epsilon: float = 0.0
    C: float = 0.0
    sphere_collapse: bool = True

    def __post_init__(self):
        run_validators(self.d1, [PositiveIntegerValidator('d1')])
        run_validators(self.d2, [PositiveIntegerValidator('d2')])
        for name, validator in (
            ('A1', FiniteRealValidator('A1', nonnegative=True)),
            ('A2', FiniteRealValidator('A2', positive=True)),
            ('A3', FiniteRealValidator('A3', nonnegative=True)),
            ('epsilon', FiniteRealValidator('epsilon')),
            ('C', FiniteRealValidator('C')),
        ):
            object.__setattr__(self, name, run_validators(getattr(self, name), [validator]))

        if self.sphere_collapse and self.A1 != self.d1 * (self.d1 - 1):
            raise ConfigurationError(
                "A1 must equal d1(d1-1) for a collapsing sphere",
                d1=self.d1,
                A1=self.A1,
            )

    @property
    def n(self):
        return self.d1 + self.d2

    @property
    def is_hyperbolic(self):
        """The initial critical point is hyperbolic exactly when d1 > 1."""
        return self.d1 > 1

    def with_constants(self, epsilon=None, C=None):
        changes = {}
        if epsilon is not None:
            changes['epsilon'] = float(epsilon)
        if C is not None:
            changes['C'] = float(C)
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CircleBundleParams:
    """Principal circle bundle over a Fano base with Ric = p g and Euler class q."""

    p: int
    q: int
    d: int

    def __post_init__(self):
        run_validators(self.p, [PositiveIntegerValidator('p')])
        run_validators(self.d, [PositiveIntegerValidator('d', minimum=2)])
        if isinstance(self.q, bool) or not isinstance(self.q, int) or self.q == 0:
            raise ConfigurationError("q must be a nonzero integer", q=self.q)
        if self.d % 2:
            raise ConfigurationError("the Fano base has even real dimension", d=self.d)

    def to_two_summands(self, epsilon=0.0, C=0.0):
        return TwoSummandsParams(
            d1=1,
            d2=self.d,
            A1=0.0,
            A2=float(self.d * self.p),
            A3=self.d * self.q**2 / 4,
            epsilon=epsilon,
            C=C,
        )

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class MultiWarpedParams:
    """
    Multiple warped products over a collapsing sphere, optionally with a
    virtual m-dimensional Einstein fiber (m finite).

    factors holds (d_i, lambda_i); lambda_1 = d_1 - 1 is the Einstein constant
    of the unit collapsing sphere.
    """

    factors: tuple
    m: float = math.inf
    lambda_virtual: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        factors = tuple((int(d), float(lam)) for d, lam in self.factors)
        object.__setattr__(self, 'factors', factors)
        if not factors:
            raise ConfigurationError("at least one factor is required")
        for index, (dim, lam) in enumerate(factors):
            run_validators(dim, [PositiveIntegerValidator(f'd{index + 1}')])
            if index > 0 and lam <= 0:
                raise ConfigurationError("lambda_i must be positive for i >= 2", index=index + 1)
        d1, lam1 = factors[0]
        if lam1 != d1 - 1:
            raise ConfigurationError("lambda_1 must equal d1 - 1", d1=d1, lambda_1=lam1)

        m = run_validators(self.m, [FiniteRealValidator('m', positive=True, allow_infinite=True)])
        object.__setattr__(self, 'm', m)
        run_validators(self.epsilon, [FiniteRealValidator('epsilon')])
        run_validators(self.lambda_virtual, [FiniteRealValidator('lambda_virtual')])

    @classmethod
    def from_two_summands(cls, params, m=math.inf, lambda_virtual=0.0):
        """Warped-product two-summands geometry (A3 = 0) as a multi-warped set."""
        if params.A3 != 0:
            raise NotApplicableError("multi-warped systems carry no submersion term", A3=params.A3)
        return cls(
            factors=((params.d1, params.A1 / params.d1), (params.d2, params.A2 / params.d2)),
            m=m,
            lambda_virtual=lambda_virtual,
            epsilon=params.epsilon,
        )

    @property
    def is_finite(self):
        return math.isfinite(self.m)

    @property
    def dims(self):
        dims = tuple(float(dim) for dim, _ in self.factors)
        return dims + (self.m,) if self.is_finite else dims

    @property
    def lambdas(self):
        lambdas = tuple(lam for _, lam in self.factors)
        return lambdas + (self.lambda_virtual,) if self.is_finite else lambdas

    @property
    def size(self):
        return len(self.dims)

    @property
    def n(self):
        return sum(self.dims)


@dataclass(frozen=True)
class QuasiParams:
    """
    Three-summand parameter set of the m-quasi-Einstein lift.

    A3 is the virtual slot m*lambda3; the submersion constant of the
    two-summands geometry is carried separately as `submersion`.
    """

    d1: int
    d2: int
    m: float
    A1: float
    A2: float
    A3: float
    submersion: float
    epsilon: float = 0.0
    C: float = 0.0

    def __post_init__(self):
        run_validators(self.d1, [PositiveIntegerValidator('d1')])
        run_validators(self.d2, [PositiveIntegerValidator('d2')])
        for name, validator in (
            ('m', FiniteRealValidator('m', positive=True)),
            ('A1', FiniteRealValidator('A1', nonnegative=True)),
            ('A2', FiniteRealValidator('A2', positive=True)),
            ('A3', FiniteRealValidator('A3')),
            ('submersion', FiniteRealValidator('submersion', nonnegative=True)),
            ('epsilon', FiniteRealValidator('epsilon')),
            ('C', FiniteRealValidator('C')),
        ):
            object.__setattr__(self, name, run_validators(getattr(self, name), [validator]))

    @property
    def dims(self):
        return (float(self.d1), float(self.d2), float(self.m))

    @property
    def n(self):
        return sum(self.dims)


@dataclass(frozen=True)
class ConeSolution:
    c1: float
    c2: float
    branch: Branch

    @property
    def ratio(self):
        return self.c1 / self.c2


@dataclass(frozen=True)
class ConeStability:
    kind: StabilityClass
    eigenvalues: tuple
    discriminant: float

    @property
    def rotation_rate(self):
        """|Im lambda|; zero for nodes."""
        return abs(complex(self.eigenvalues[0]).imag)


@dataclass(frozen=True)
class Preset:
    name: PresetName
    m: int = 1

    def __post_init__(self):
        if not isinstance(self.name, PresetName):
            object.__setattr__(self, 'name', self.parse_name(self.name))
        run_validators(self.m, [PositiveIntegerValidator('m')])
        if self.name is PresetName.CAP and self.m != 1:
            raise ConfigurationError("the CaP preset exists only for m = 1", m=self.m)

    @staticmethod
    def parse_name(value):
        try:
            return PresetName(str(value).strip().lower())
        except ValueError:
            choices = "|".join(p.value for p in PresetName)
            raise ConfigurationError(f"unknown preset {value!r}, expected one of {choices}")

    def __str__(self):
        return f"{self.name.label}(m={self.m})"
