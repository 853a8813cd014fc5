"""
Dynamics services for the soliton lab.
Handles vector-field evaluation on state types, conserved quantities, locus
residuals, the linearization at the initial critical point and the
Lyapunov functionals.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from apps.core.exceptions import ConfigurationError, NotApplicableError
from apps.dynamics import fields
from apps.dynamics.states import (
    Functionals,
    HatState,
    MultiState,
    PhaseState,
    PlanarState,
    PolynomialState,
    ProfileState,
    QuasiState,
)
from apps.geometry.services import AlgebraService

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Linearization:
    """Jacobian of the rescaled field at the initial critical point, in (X1, X2, Y1, Y2, L)."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenspaces: dict

    @property
    def is_hyperbolic(self):
        return bool(np.all(np.abs(self.eigenvalues.real) > 1e-14))

    @property
    def unstable_basis(self):
        """Eigenvectors for 2/d1, then the Y2 and L directions (rate 1/d1)."""
        return np.array(
            [
                [2.0, 0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, 1.0],
            ]
        )


class FieldService:
    """Vector fields evaluated on state types; derivatives come back as the same type."""

    @staticmethod
    def initial_point(params):
        """Stationary point X1 = Y1 = 1/d1 where the sphere collapses smoothly."""
        return PhaseState(X1=1 / params.d1, X2=0.0, Y1=1 / params.d1, Y2=0.0, L=0.0)

    @staticmethod
    def rhs_rescaled(params, state):
        return PhaseState.from_vector(fields.rescaled_field(params, state.to_vector()))

    @staticmethod
    def rhs_polynomial(params, state):
        """state is a PolynomialState; Y2^4/Y1^2 is replaced by W^2."""
        return PolynomialState.from_vector(fields.polynomial_field(params, state.to_vector()))

    @staticmethod
    def rhs_hat(params, state):
        return HatState.from_vector(fields.hat_field(params, state.to_vector()))

    @staticmethod
    def rhs_profile(params, state, mode='einstein', m=math.inf):
        if mode not in ('einstein', 'soliton'):
            raise ConfigurationError(f"unknown profile mode {mode!r}")
        y = fields.profile_field(params, state.to_vector(), einstein=(mode == 'einstein'), m=m)
        return ProfileState.from_vector(y)

    @staticmethod
    def rhs_planar(params, X1, Y1, eps_l2):
        """Returns (X1', Y1', L'/L)."""
        return fields.planar_rates(params, X1, Y1, eps_l2)

    @staticmethod
    def planar_from_phase(state):
        return PlanarState(X1=state.X1, Y1=state.Y1, L=state.L)

    @staticmethod
    def rhs_multi(params, state):
        y = fields.multi_field(params, state.to_vector())
        return MultiState.from_vector(y, params.size)

    @staticmethod
    def rhs_quasi(params, state):
        return QuasiState.from_vector(fields.quasi_field(params, state.to_vector()))


class ResidualService:
    """Conserved quantities, loci and the linearization."""

    @staticmethod
    def conservation_residual(params, state):
        return fields.rescaled_conservation(params, state.to_vector())

    @staticmethod
    def locus_residuals(params, state):
        return fields.locus(params, state.to_vector())

    @staticmethod
    def hat_residuals(params, state):
        """(conservation, constraint hL - sum d_i hX_i) for Einstein hat states."""
        y = state.to_vector()
        return fields.hat_conservation(params, y), fields.hat_constraint(params, y)

    @staticmethod
    def multi_conservation_residual(params, state):
        return fields.multi_conservation(params, state.to_vector())

    @staticmethod
    def multi_constraint_residual(params, state):
        return fields.multi_constraint(params, state.to_vector())

    @staticmethod
    def quasi_residuals(params, state):
        y = state.to_vector()
        return fields.quasi_conservation(params, y), fields.quasi_constraint(params, y)

    @staticmethod
    def linearization_initial(params):
        d1 = params.d1
        matrix = np.array(
            [
                [3 / d1 - 1, 0.0, 2 * (d1 - 1) / d1, 0.0, 0.0],
                [0.0, 1 / d1 - 1, 0.0, 0.0, 0.0],
                [1 / d1, 0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1 / d1, 0.0],
                [0.0, 0.0, 0.0, 0.0, 1 / d1],
            ]
        )
        eigenvalues = np.linalg.eigvals(matrix)
        eigenvalues = eigenvalues[np.argsort(-eigenvalues.real, kind='stable')]

        eigenspaces = {
            2 / d1: (np.array([2.0, 0, 1, 0, 0]),),
            1 / d1 - 1: (np.array([0.0, 1, 0, 0, 0]), np.array([d1 - 1.0, 0, -1, 0, 0])),
            1 / d1: (np.array([0.0, 0, 0, 1, 0]), np.array([0.0, 0, 0, 0, 1])),
        }
        return Linearization(matrix=matrix, eigenvalues=eigenvalues, eigenspaces=eigenspaces)

    @staticmethod
    def functionals(params, state):
        """
        Lyapunov functionals at a rescaled state.

        Ktilde is the circle-bundle functional and coincides with K when d1 = 1;
        it is NaN otherwise. F0 at Y2 = 0 is +inf with F0_infinite set.
        """
        X1, X2, Y1, Y2, L = state.X1, state.X2, state.Y1, state.Y2, state.L
        d1, d2, n = params.d1, params.d2, params.n

        omega = Y2 / Y1
        shape = (X1 - X2) / Y1
        K = 0.5 * omega ** (2 * (d1 - 1)) * shape * shape - AlgebraService.g_hat(params, omega)
        Ktilde = K if d1 == 1 else math.nan

        trace = d1 * X1 + d2 * X2
        if Y2 > 0:
            bracket = (
                params.A1 * Y1 * Y1
                + Y2 * Y2 * (params.A2 - params.A3 * Y2 * Y2 / (Y1 * Y1))
                + d1 * X1 * X1
                + d2 * X2 * X2
                - trace * trace / n
            )
            F0 = Y1 ** (-2 * d1 / n) * Y2 ** (-2 * d2 / n) * bracket
            infinite = False
        else:
            F0, infinite = math.inf, True

        return Functionals(
            K=K,
            Ktilde=Ktilde,
            F0=F0,
            G=Y1**d1 * Y2**d2,
            mean_curvature=1 / L if L > 0 else math.inf,
            F0_infinite=infinite,
        )

    @staticmethod
    def ktilde(bundle, state):
        """Circle-bundle functional from (p, q, d) directly."""
        omega = state.Y2 / state.Y1
        shape = (state.X1 - state.X2) / state.Y1
        return (
            0.5 * shape * shape
            + 0.5 * bundle.p * omega**2
            - (bundle.d + 2) / 16 * bundle.q**2 * omega**4
            - 0.5
        )


class KahlerService:
    """The Kaehler subspace of circle-bundle flows."""

    @staticmethod
    def kahler_residuals(bundle, state, epsilon):
        X1, X2, Y1, Y2, L = state.X1, state.X2, state.Y1, state.Y2, state.L
        return (
            X2 * X2 - (bundle.q**2 / 4) * Y2**4 / (Y1 * Y1),
            X2 * (X1 + 1) - (bundle.p * Y2 * Y2 + 0.5 * epsilon * L * L),
        )

    @staticmethod
    def kahler_seed(bundle, X1, Y2, L, epsilon, t=0.0, u=0.0):
        """State on the Kaehler subspace with prescribed X1, Y2 and L."""
        forcing = bundle.p * Y2 * Y2 + 0.5 * epsilon * L * L
        if not forcing > 0 or not X1 > -1:
            raise ConfigurationError("Kaehler seed needs p Y2^2 + (eps/2) L^2 > 0 and X1 > -1")
        half_q = bundle.q / 2
        Y1 = half_q * Y2 * Y2 * (X1 + 1) / forcing
        if not Y1 > 0:
            raise ConfigurationError("Kaehler seed needs q > 0", q=bundle.q)
        return PhaseState(X1=X1, X2=half_q * Y2 * Y2 / Y1, Y1=Y1, Y2=Y2, L=L, t=t, u=u)


class ProfileService:
    """Closed-form profiles, coordinate changes and the scalar curvature."""

    @staticmethod
    def cone_profile(params, cone, t):
        """
        Cone profile f_i = c_i sin(k t)/k with eps/2 = -n k^2; sinh for eps > 0
        and c_i t for eps = 0.
        """
        kappa_sq = -params.epsilon / (2 * params.n)
        if kappa_sq > 0:
            kappa = math.sqrt(kappa_sq)
            shape, slope = math.sin(kappa * t) / kappa, math.cos(kappa * t)
        elif kappa_sq < 0:
            kappa = math.sqrt(-kappa_sq)
            shape, slope = math.sinh(kappa * t) / kappa, math.cosh(kappa * t)
        else:
            shape, slope = t, 1.0
        return ProfileState(
            f1=cone.c1 * shape,
            df1=cone.c1 * slope,
            f2=cone.c2 * shape,
            df2=cone.c2 * slope,
        )

    @staticmethod
    def profile_to_hat(params, state):
        return HatState(
            hX1=state.df1 / state.f1,
            hX2=state.df2 / state.f2,
            hY1=1 / state.f1,
            hY2=1 / state.f2,
            hL=state.trace_l(params.d1, params.d2) - state.du,
        )

    @staticmethod
    def hat_to_profile(params, state, u=0.0):
        du = params.d1 * state.hX1 + params.d2 * state.hX2 - state.hL
        return ProfileState(
            f1=1 / state.hY1,
            df1=state.hX1 / state.hY1,
            f2=1 / state.hY2,
            df2=state.hX2 / state.hY2,
            u=u,
            du=du,
        )

    @staticmethod
    def profile_to_phase(params, state, t=0.0):
        hat = ProfileService.profile_to_hat(params, state)
        if not hat.hL > 0:
            raise NotApplicableError("rescaling needs -du/dt + tr L > 0", hL=hat.hL)
        return PhaseState(
            X1=hat.hX1 / hat.hL,
            X2=hat.hX2 / hat.hL,
            Y1=hat.hY1 / hat.hL,
            Y2=hat.hY2 / hat.hL,
            L=1 / hat.hL,
            t=t,
            u=state.u,
        )

    @staticmethod
    def scalar_curvature(params, u, du):
        """R = -C - eps u - du^2 - ((n+1)/2) eps, from the conservation law."""
        return -params.C - params.epsilon * u - du * du - 0.5 * (params.n + 1) * params.epsilon

    @staticmethod
    def phase_potential_rate(params, state):
        """du/dt = (d1 X1 + d2 X2 - 1)/L on a rescaled state with L > 0."""
        return (params.d1 * state.X1 + params.d2 * state.X2 - 1) / state.L
