"""
Geometry services for the soliton lab.
Handles the Hopf-fibration presets and the algebra derived from a parameter
set: the trapping discriminant, its roots, cone solutions and their stability.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from apps.core.exceptions import (
    ConfigurationError,
    InconsistencyError,
    NotApplicableError,
)
from apps.core.utils import exact_rational
from apps.geometry.params import (
    Branch,
    ConeSolution,
    ConeStability,
    Preset,
    PresetName,
    QuasiParams,
    StabilityClass,
    TwoSummandsParams,
)

logger = logging.getLogger(__name__)

# (d1, d2, |A|^2, Ric^Q) per family index m
HOPF_FIBRATIONS = {
    PresetName.CP: lambda m: (1, 2 * m, 1, 2 * m + 2),
    PresetName.HP: lambda m: (3, 4 * m, 3, 4 * m + 8),
    PresetName.F: lambda m: (2, 4 * m, 8, 4 * m + 8),
    PresetName.CAP: lambda m: (7, 8, 7, 28),
}

CONE_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class PresetSummary:
    """One row of the preset table."""

    preset: Preset
    params: TwoSummandsParams
    norm_a_sq: int
    ric_q: int
    d_hat: float
    d_hat_sign: int
    cones: tuple
    stability: object
    notes: tuple


class PresetService:
    """Service resolving Hopf-fibration presets."""

    @staticmethod
    def fibration_constants(preset):
        return HOPF_FIBRATIONS[preset.name](preset.m)

    @staticmethod
    def resolve(preset, epsilon=0.0, C=0.0):
        """Resolve a preset to its two-summands parameter set."""
        d1, d2, norm_a_sq, ric_q = PresetService.fibration_constants(preset)
        return TwoSummandsParams(
            d1=d1,
            d2=d2,
            A1=float(d1 * (d1 - 1)),
            A2=float(d2 * ric_q),
            A3=float(d2 * norm_a_sq),
            epsilon=epsilon,
            C=C,
        )

    @staticmethod
    def available(m):
        """All presets defined for family index m; CaP only exists for m = 1."""
        names = [PresetName.CP, PresetName.HP, PresetName.F]
        if m == 1:
            names.append(PresetName.CAP)
        return [Preset(name, m) for name in names]

    @staticmethod
    def summarize(preset):
        """Collect everything the preset table prints for one preset."""
        d1, d2, norm_a_sq, ric_q = PresetService.fibration_constants(preset)
        params = PresetService.resolve(preset)
        d_hat = AlgebraService.d_hat(params)
        sign = AlgebraService.d_hat_sign(params)

        notes = []
        if not params.is_hyperbolic:
            notes.append("non-hyperbolic critical point")
        if sign == 0:
            notes.append("boundary")

        try:
            cones = tuple(ConeService.cone_solutions(params))
        except NotApplicableError:
            cones = ()
            notes.append("cone solutions n/a")

        stability = None
        first = [cone for cone in cones if cone.branch is Branch.FIRST]
        if first:
            stability = ConeService.classify_cone_stability(params, first[0])

        return PresetSummary(
            preset=preset,
            params=params,
            norm_a_sq=norm_a_sq,
            ric_q=ric_q,
            d_hat=d_hat,
            d_hat_sign=sign,
            cones=cones,
            stability=stability,
            notes=tuple(notes),
        )


class AlgebraService:
    """Closed-form quantities derived from a parameter set."""

    @staticmethod
    def _d_hat_exact(params):
        A2, A3 = exact_rational(params.A2), exact_rational(params.A3)
        if A2 is None or A3 is None:
            return None
        d1, d2 = Fraction(params.d1), Fraction(params.d2)
        return (A2 / d2) ** 2 - 4 * (A3 / d2) * (d1 / (d1 + 1)) * (2 * d1 + d2)

    @staticmethod
    def d_hat(params):
        """
        Trapping discriminant (A2/d2)^2 - 4 (A3/d2) (d1/(d1+1)) (2 d1 + d2).

        Integral constants are evaluated in exact arithmetic so boundary
        cases such as F with m = 2 give exactly zero.
        """
        exact = AlgebraService._d_hat_exact(params)
        if exact is not None:
            return float(exact)
        d1, d2 = params.d1, params.d2
        return (params.A2 / d2) ** 2 - 4 * (params.A3 / d2) * (d1 / (d1 + 1)) * (2 * d1 + d2)

    @staticmethod
    def d_hat_sign(params):
        exact = AlgebraService._d_hat_exact(params)
        value = exact if exact is not None else AlgebraService.d_hat(params)
        return (value > 0) - (value < 0)

    @staticmethod
    def g_hat(params, omega):
        """The potential whose positive zeros are the trapping roots."""
        d1, d2 = params.d1, params.d2
        return (
            params.A3 * (1 / d1 + 2 / d2) * omega ** (2 * (d1 + 1)) / (2 * (d1 + 1))
            - omega ** (2 * d1) * params.A2 / (2 * d1 * d2)
            + omega ** (2 * (d1 - 1)) / 2
        )

    @staticmethod
    def omega_hat_roots(params):
        """
        Positive zeros 0 < w1 < w2 of g_hat, present exactly when d_hat > 0.

        Returns None when absent; raises NotApplicableError for A3 = 0.
        """
        if params.A3 <= 0:
            raise NotApplicableError("omega-hat roots need A3 > 0 (warped-product case)", A3=params.A3)
        if AlgebraService.d_hat_sign(params) <= 0:
            return None

        d1, d2 = params.d1, params.d2
        root = d2 * math.sqrt(AlgebraService.d_hat(params))
        scale = (d1 + 1) / (2 * params.A3 * (2 * d1 + d2))
        low, high = scale * (params.A2 - root), scale * (params.A2 + root)
        if low <= 0:
            return None
        return math.sqrt(low), math.sqrt(high)

    @staticmethod
    def omega_tilde_roots(bundle):
        """Positive zeros of (p/2) w^2 - ((d+2)/16) q^2 w^4 - 1/2, if 2p^2 > (d+2)q^2."""
        p, q, d = bundle.p, bundle.q, bundle.d
        if 2 * p * p <= (d + 2) * q * q:
            return None
        denominator = (d + 2) * q * q
        root = math.sqrt(p * p - denominator / 2)
        low = 4 * (p - root) / denominator
        high = 4 * (p + root) / denominator
        return math.sqrt(low), math.sqrt(high)

    @staticmethod
    def lift_quasi(params, m, lambda3):
        """Three-summand m-quasi-Einstein parameter set with an m-dimensional virtual fiber."""
        if m is None or math.isnan(m):
            raise ConfigurationError("m must be a positive real", m=m)
        if math.isinf(m):
            raise NotApplicableError("the quasi lift is undefined for m = inf; use the soliton system")
        if m <= 0:
            raise ConfigurationError("m must be positive", m=m)

        return QuasiParams(
            d1=params.d1,
            d2=params.d2,
            m=float(m),
            A1=params.A1,
            A2=params.A2,
            A3=m * lambda3,
            submersion=params.A3,
            epsilon=params.epsilon,
            C=params.C,
        )


class ConeService:
    """Cone solutions and the stability of the corresponding stationary points."""

    @staticmethod
    def cone_residuals(params, c1_sq, c2_sq):
        """Relative residuals of both defining equations."""
        n, d1, d2 = params.n, params.d1, params.d2
        coupling = params.A3 * c1_sq / c2_sq**2
        first = (n - 1) * d1
        second = (n - 1) * d2
        return (
            abs(first - (params.A1 / c1_sq + coupling)) / first,
            abs(second - (params.A2 / c2_sq - 2 * coupling)) / second,
        )

    @staticmethod
    def _candidates(params):
        n, d1, d2 = params.n, params.d1, params.d2
        A1, A2, A3 = params.A1, params.A2, params.A3
        exact = [exact_rational(value) for value in (A1, A2, A3)]

        if all(value is not None for value in exact):
            A1, A2, A3 = exact
            discriminant = A2**2 * d1**2 - 4 * A1 * A3 * d2 * (2 * d1 + d2)
            if discriminant < 0:
                return []
            if discriminant.denominator == 1 and math.isqrt(discriminant.numerator) ** 2 == discriminant:
                root = Fraction(math.isqrt(discriminant.numerator))
            else:
                root = math.sqrt(discriminant)
        else:
            discriminant = A2**2 * d1**2 - 4 * A1 * A3 * d2 * (2 * d1 + d2)
            if discriminant < 0:
                return []
            root = math.sqrt(discriminant)

        signs = (1,) if discriminant == 0 else (1, -1)
        candidates = []
        for sign in signs:
            c2_sq = (A2 * n + sign * root) / (d2 * (2 * d1 + d2) * (n - 1))
            if c2_sq <= 0:
                continue
            # second defining equation is linear in c1^2
            c1_sq = (A2 / c2_sq - (n - 1) * d2) * c2_sq**2 / (2 * A3)
            if c1_sq <= 0:
                continue
            candidates.append((float(c1_sq), float(c2_sq)))
        return candidates

    @staticmethod
    def cone_solutions(params):
        """
        Solve the cone equations
            (n-1) d1 = A1/c1^2 + A3 c1^2/c2^4
            (n-1) d2 = A2/c2^2 - 2 A3 c1^2/c2^4
        and order the solutions by c1/c2 (first is smaller).

        With A3 != 0, c1^2 is read off the second equation, which is linear
        in c1^2 and equivalent to the first once c2 is fixed; both equations
        are checked again on every candidate.
        """
        if params.A1 <= 0 or params.A2 <= 0:
            raise NotApplicableError("cone solutions need A1 > 0 and A2 > 0", A1=params.A1)

        n = params.n
        if params.A3 == 0:
            candidates = [
                (params.A1 / ((n - 1) * params.d1), params.A2 / ((n - 1) * params.d2)),
            ]
        else:
            candidates = ConeService._candidates(params)

        for c1_sq, c2_sq in candidates:
            residuals = ConeService.cone_residuals(params, c1_sq, c2_sq)
            if max(residuals) > CONE_RESIDUAL_TOL:
                raise InconsistencyError(
                    "cone solution failed re-verification",
                    c1_sq=c1_sq,
                    c2_sq=c2_sq,
                    residual=max(residuals),
                )

        candidates.sort(key=lambda pair: pair[0] / pair[1])
        branches = (Branch.FIRST, Branch.SECOND)
        solutions = [
            ConeSolution(math.sqrt(c1_sq), math.sqrt(c2_sq), branch)
            for (c1_sq, c2_sq), branch in zip(candidates, branches)
        ]
        logger.debug(f"Cone solutions for {params}: {solutions}")
        return solutions

    @staticmethod
    def first_cone(params):
        solutions = ConeService.cone_solutions(params)
        if not solutions:
            raise NotApplicableError("no real cone solution", d1=params.d1, d2=params.d2)
        return solutions[0]

    @staticmethod
    def cone_point(params, cone):
        """Rescaled stationary point (X1, X2, Y1, Y2) of a cone solution."""
        n = params.n
        return (1 / n, 1 / n, 1 / (n * cone.c1), 1 / (n * cone.c2))

    @staticmethod
    def classify_cone_stability(params, cone):
        """
        Eigenvalues of the planar linearization at the cone point, from
            l^2 + ((n-1)/n) l + (2/n^2) [n - 1 - 2 A3 k] = 0,
            k = (c1^2/c2^4)(1/d1 + 1/d2).
        Complex eigenvalues make the point a spiral; a zero discriminant is a node.

        With A3 = 0 the discriminant is (n-1)(n-9)/n^2, so warped products
        spiral exactly when n <= 8. The first CaP cone has a positive
        discriminant: a node with two negative real eigenvalues.
        """
        n = params.n
        k = (cone.c1**2 / cone.c2**4) * (1 / params.d1 + 1 / params.d2)
        linear = (n - 1) / n
        constant = (2 / n**2) * (n - 1 - 2 * params.A3 * k)
        discriminant = ((n - 1) * (n - 9) + 16 * params.A3 * k) / n**2

        root = cmath.sqrt(discriminant)
        eigenvalues = ((-linear + root) / 2, (-linear - root) / 2)
        if discriminant >= 0:
            eigenvalues = tuple(value.real for value in eigenvalues)

        if constant <= 0:
            logger.warning(f"⚠️ Cone point of {params} is not a sink (constant term {constant})")

        kind = StabilityClass.SPIRAL if discriminant < 0 else StabilityClass.NODE
        return ConeStability(kind=kind, eigenvalues=eigenvalues, discriminant=discriminant)
