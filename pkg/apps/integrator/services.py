"""
Integrator services for the soliton lab.
Handles adaptive integration with event location, unstable-manifold seeding
at the initial critical point and profile seeding at the singular orbit.
"""

import bisect
import logging
import math
from dataclasses import replace

import numpy as np
from django.conf import settings
from scipy.integrate import DOP853
from scipy.optimize import brentq

from apps.core.exceptions import (
    ConfigurationError,
    DomainExitError,
    IntegrationError,
    SeedingError,
)
from apps.dynamics import fields
from apps.dynamics.states import MultiState, PhaseState, ProfileState, QuasiState
from apps.integrator.controls import IntegrationControls, Locus
from apps.integrator.events import Event, EventKind, EventSpec, Trajectory
from apps.integrator.systems import DynamicalSystem, build_system

logger = logging.getLogger(__name__)

BRENT_RTOL = 4 * np.finfo(float).eps

# A window that never left the seed neighbourhood is not a limit.
MIN_DISPLACEMENT_FACTOR = 1e3


def _crossed(g_old, g_new, direction):
    if not (math.isfinite(g_old) and math.isfinite(g_new)):
        return False
    rising = g_old < 0 <= g_new
    falling = g_old > 0 >= g_new
    return (rising and direction >= 0) or (falling and direction <= 0)


def _safe(function, y):
    try:
        return float(function(y))
    except (DomainExitError, ZeroDivisionError, FloatingPointError):
        return math.nan


class IntegrationService:
    """Service stepping DOP853 with event location on its dense output."""

    @staticmethod
    def integrate(params, system, state0, controls=None, s0=0.0, stop_at=(), **options):
        """
        Integrate from state0 at s0 up to controls.s_max.

        system is a registered name or a DynamicalSystem instance. Event kinds
        listed in stop_at become terminal. Returns a Trajectory; a step-size
        underflow raises IntegrationError with the last accepted state.
        """
        controls = controls or IntegrationControls.from_settings()
        if not isinstance(system, DynamicalSystem):
            system = build_system(system, params, **options)
        if controls.s_max <= s0:
            raise ConfigurationError("horizon must lie beyond the initial time", s0=s0, s_max=controls.s_max)

        y0 = system.prepare(state0)
        stop_kinds = {EventKind(kind) for kind in stop_at}
        specs = [
            replace(spec, terminal=True) if spec.kind in stop_kinds else spec
            for spec in system.events()
        ]
        guarded = np.asarray(system.phase_indices, dtype=int)
        specs.append(
            EventSpec(
                EventKind.BLOW_UP,
                lambda y: controls.norm_cap - float(np.linalg.norm(y[guarded])),
                direction=-1,
                terminal=True,
            )
        )

        solver = DOP853(
            system.rhs,
            s0,
            y0,
            controls.s_max,
            max_step=controls.max_step,
            rtol=controls.rel_tol,
            atol=controls.abs_tol,
        )

        samples_s, samples_y = [float(s0)], [y0.copy()]
        residuals = {name: [value] for name, value in IntegrationService._residuals(system, y0).items()}
        events = []
        g_previous = [_safe(spec.function, y0) for spec in specs]
        termination = None

        while termination is None:
            s_old, y_old = solver.t, solver.y.copy()
            try:
                message = solver.step()
            except DomainExitError as exc:
                logger.info(f"⚠️ Domain exit at s={s_old:.6g}: {exc}")
                events.append(Event(EventKind.DOMAIN_EXIT, s_old, y_old))
                termination = EventKind.DOMAIN_EXIT
                break

            if solver.status == 'failed':
                logger.error(f"❌ Integration failed at s={s_old:.6g}: {message}")
                raise IntegrationError(message or "step size underflow", s=s_old, state=y_old)

            s_new, y_new = solver.t, solver.y.copy()
            dense = solver.dense_output()
            located = []
            for index, spec in enumerate(specs):
                g_new = _safe(spec.function, y_new)
                if _crossed(g_previous[index], g_new, spec.direction):
                    root = IntegrationService._locate(spec, dense, s_old, s_new, g_previous[index], g_new, controls)
                    located.append((root, spec))
                g_previous[index] = g_new
            located.sort(key=lambda item: item[0])

            stop = None
            for root, spec in located:
                state = dense(root)
                events.append(Event(spec.kind, root, state, IntegrationService._slope(spec, dense, root, s_old, s_new)))
                if spec.terminal:
                    stop = (root, state, spec.kind)
                    break

            if stop is not None:
                root, state, kind = stop
                if root > samples_s[-1]:
                    IntegrationService._record(system, samples_s, samples_y, residuals, root, state)
                logger.info(f"🛑 {kind.value} at s={root:.10g}")
                termination = kind
                break

            IntegrationService._record(system, samples_s, samples_y, residuals, s_new, y_new)

            if controls.detect_convergence and IntegrationService._converged(
                system, samples_s, samples_y, controls
            ):
                events.append(Event(EventKind.CONVERGED, s_new, y_new))
                logger.info(f"✅ Converged at s={s_new:.6g}")
                termination = EventKind.CONVERGED
            elif solver.status == 'finished':
                termination = EventKind.HORIZON_REACHED

        return Trajectory(
            params=params,
            system=system.name,
            names=tuple(system.names),
            s=np.asarray(samples_s),
            y=np.asarray(samples_y),
            events=tuple(events),
            termination=termination,
            residuals={name: np.asarray(values) for name, values in residuals.items()},
        )

    @staticmethod
    def _residuals(system, y):
        try:
            return system.residuals(y)
        except DomainExitError:
            return {}

    @staticmethod
    def _record(system, samples_s, samples_y, residuals, s, y):
        samples_s.append(float(s))
        samples_y.append(np.array(y, dtype=float))
        values = IntegrationService._residuals(system, y)
        for name in residuals:
            residuals[name].append(values.get(name, math.nan))

    @staticmethod
    def _locate(spec, dense, s_old, s_new, g_old, g_new, controls):
        """Root of g on the dense-output interpolant, to event_tol in s."""
        if g_new == 0:
            return s_new
        g_start = _safe(spec.function, dense(s_old))
        if not math.isfinite(g_start) or g_start * g_new > 0:
            g_start = g_old
        try:
            return brentq(
                lambda s: _safe(spec.function, dense(s)),
                s_old,
                s_new,
                xtol=controls.event_tol,
                rtol=BRENT_RTOL,
            )
        except ValueError:
            # interpolant sign differs from the step endpoints; fall back to the secant
            return s_old + (s_new - s_old) * g_start / (g_start - g_new)

    @staticmethod
    def _slope(spec, dense, root, s_old, s_new):
        h = max((s_new - s_old) * 1e-3, 1e-12)
        low, high = max(s_old, root - h), min(s_new, root + h)
        if high <= low:
            return math.nan
        return (_safe(spec.function, dense(high)) - _safe(spec.function, dense(low))) / (high - low)

    @staticmethod
    def _converged(system, samples_s, samples_y, controls):
        indices = system.convergence_indices
        if not indices:
            return False
        s_now = samples_s[-1]
        if s_now - samples_s[0] < controls.convergence_window:
            return False
        start = bisect.bisect_left(samples_s, s_now - controls.convergence_window)
        if len(samples_s) - start < 3:
            return False

        chunk = np.asarray(samples_y[start:])[:, indices]
        mean = chunk.mean(axis=0)
        if np.max(np.abs(chunk - mean)) >= controls.convergence_tol:
            return False
        displacement = np.max(np.abs(mean - samples_y[0][list(indices)]))
        return displacement > MIN_DISPLACEMENT_FACTOR * controls.convergence_tol

    @staticmethod
    def count_omega_critical(trajectory):
        """OmegaCritical events strictly before the maximal volume orbit (or termination)."""
        limit = math.inf
        max_volume = trajectory.first_event(EventKind.MAX_VOLUME_ORBIT)
        if max_volume is not None:
            limit = max_volume.s
        return sum(1 for event in trajectory.events_of(EventKind.OMEGA_CRITICAL) if event.s < limit)


class SeedingService:
    """Initial data at the singular orbit."""

    @staticmethod
    def seed_unstable(params, spec, projection_tol=None):
        """
        Displace the initial critical point along the unstable directions and
        project onto the requested locus.

        The Y2 and L components come straight from the coefficients (b, l).
        X2 takes its second-order value on the unstable manifold, X1 fixes
        S2 (zero on the Einstein locus, C d1 L^2/(d1+1) on the soliton locus)
        and Y1 (X1 when d1 = 1) is solved so the conservation law holds.
        """
        projection_tol = settings.LAB_PROJECTION_TOL if projection_tol is None else projection_tol
        a, b, l = spec.coefficients
        delta = spec.delta
        d1, d2 = params.d1, params.d2
        start = 1 / d1

        if spec.locus is Locus.UNCONSTRAINED:
            state = PhaseState(
                X1=start + 2 * delta * a,
                X2=0.0,
                Y1=start + delta * a,
                Y2=abs(delta * b),
                L=delta * l,
            )
            if state.L < 0:
                raise SeedingError("the L coefficient must be nonnegative", l=l)
            return state.validate()

        if spec.locus is Locus.EINSTEIN:
            if params.C != 0:
                raise ConfigurationError("Einstein trajectories have C = 0", C=params.C)
            if a != 0:
                raise SeedingError("Einstein seeds are tangent to the locus; the 2/d1 coefficient must vanish", a=a)
            target_factor = 0.0
        else:
            if not params.C < 0:
                raise ConfigurationError("soliton seeds need C < 0", C=params.C)
            if l == 0:
                raise SeedingError("soliton seeds need a nonzero L coefficient")
            if a != 0:
                logger.debug(f"Soliton seed ignores a={a}; that component is fixed by C")
            target_factor = params.C * d1 / (d1 + 1)

        if l < 0:
            raise SeedingError("the L coefficient must be nonnegative", l=l)

        # Y2 -> -Y2 is a symmetry; seeds live on Y2 >= 0
        Y2, L = abs(delta * b), delta * l
        forcing = (params.A2 / d2) * Y2 * Y2 + 0.5 * params.epsilon * L * L
        X2 = forcing / (1 / d1 + 1)
        target = target_factor * L * L

        if d1 > 1:
            X1 = (1 + target - d2 * X2) / d1

            def residual(Y1):
                return fields.rescaled_conservation(params, np.array([X1, X2, Y1, Y2, L, 0.0, 0.0]))

            Y1 = SeedingService._project(residual, 0.5 * start, 2 * start)
        else:
            Y1 = start + delta * a if spec.locus is Locus.SOLITON else start

            def residual(X1):
                X2_local = (1 + target - X1) / d2
                return fields.rescaled_conservation(params, np.array([X1, X2_local, Y1, Y2, L, 0.0, 0.0]))

            X1 = SeedingService._project(residual, 0.5, 1.5)
            X2 = (1 + target - X1) / d2

        state = PhaseState(X1=X1, X2=X2, Y1=Y1, Y2=Y2, L=L)
        error = abs(fields.rescaled_conservation(params, state.to_vector()))
        if error >= projection_tol:
            raise SeedingError("locus projection did not converge", residual=error)

        logger.debug(f"🌱 Seeded {spec.locus.value} state {state} (residual {error:.2e})")
        return state.validate()

    @staticmethod
    def _project(residual, low, high):
        f_low, f_high = residual(low), residual(high)
        if f_low * f_high > 0:
            raise SeedingError("locus projection has no bracket", low=low, high=high)
        return brentq(residual, low, high, xtol=1e-16, rtol=BRENT_RTOL, maxiter=200)

    @staticmethod
    def multi_seed(params, Y_tail, L=0.0, projection_tol=None):
        """
        Displaced stationary point of a multi-warped system on the
        Einstein-type locus: Y_i (i >= 2) and L are prescribed, X_i takes its
        second-order value and the first factor absorbs both constraints.
        """
        projection_tol = settings.LAB_PROJECTION_TOL if projection_tol is None else projection_tol
        dims, lambdas = params.dims, params.lambdas
        k = params.size
        if len(Y_tail) != k - 1:
            raise SeedingError("one Y displacement per non-collapsing factor is required", expected=k - 1)

        d1 = dims[0]
        half_eps_l2 = 0.5 * params.epsilon * L * L
        X = [0.0] * k
        Y = [1 / d1] + [abs(float(value)) for value in Y_tail]
        for i in range(1, k):
            X[i] = (lambdas[i] * Y[i] ** 2 + half_eps_l2) / (1 / d1 + 1)

        def build(X1, Y1, last=None):
            X_local = list(X)
            X_local[0] = X1
            if last is not None:
                X_local[-1] = last
            Y_local = list(Y)
            Y_local[0] = Y1
            return MultiState(X=tuple(X_local), Y=tuple(Y_local), L=L).to_vector()

        tail = sum(dims[i] * X[i] for i in range(1, k))
        if lambdas[0] > 0:
            X1 = (1 - tail) / d1
            Y1 = SeedingService._project(
                lambda Y1: fields.multi_conservation(params, build(X1, Y1)), 0.5 / d1, 2 / d1
            )
            y = build(X1, Y1)
        else:
            inner = tail - dims[-1] * X[-1]

            def last_of(X1):
                return (1 - d1 * X1 - inner) / dims[-1]

            X1 = SeedingService._project(
                lambda X1: fields.multi_conservation(params, build(X1, Y[0], last_of(X1))), 0.5, 1.5
            )
            y = build(X1, Y[0], last_of(X1))

        error = abs(fields.multi_conservation(params, y))
        if error >= projection_tol:
            raise SeedingError("locus projection did not converge", residual=error)
        return MultiState.from_vector(y, k)

    @staticmethod
    def quasi_seed(quasi_params, state, Y3=None):
        """
        Lift a rescaled seed to the quasi system: the virtual fiber gets
        X3 = (1 - d1 X1 - d2 X2)/m and Y3 = L unless given.
        """
        X3 = (1 - quasi_params.d1 * state.X1 - quasi_params.d2 * state.X2) / quasi_params.m
        return QuasiState(
            X1=state.X1,
            X2=state.X2,
            X3=X3,
            Y1=state.Y1,
            Y2=state.Y2,
            Y3=state.L if Y3 is None else Y3,
            L=state.L,
            t=state.t,
            u=state.u,
        )

    @staticmethod
    def profile_taylor(params, fbar):
        """
        Taylor coefficients at t = 0 of f1 = t + b t^3, f2 = fbar + a t^2/2.
        """
        d1, d2 = params.d1, params.d2
        half_eps = 0.5 * params.epsilon
        a = fbar * ((params.A2 / d2) / fbar**2 + half_eps) / (d1 + 1)
        b = (half_eps - d2 * a / fbar) / (6 * d1)
        return a, b

    @staticmethod
    def seed_profile(params, fbar, t0=None, mode='einstein', check=False, controls=None):
        """
        Profile data at t0 for the solution with f1(0) = 0, f1'(0) = 1,
        f2(0) = fbar, f2'(0) = 0, from the third-order Taylor expansion.
        """
        if not fbar > 0:
            raise ConfigurationError("fbar must be positive", fbar=fbar)
        if mode == 'ricciflat':
            if params.epsilon != 0:
                raise ConfigurationError("Ricci-flat profiles need eps = 0", epsilon=params.epsilon)
        elif mode != 'einstein':
            raise ConfigurationError(f"unknown profile seed mode {mode!r}")
        if params.A1 != params.d1 * (params.d1 - 1):
            raise ConfigurationError("profile seeding needs a collapsing unit sphere")

        t0 = settings.LAB_PROFILE_T0_FACTOR * fbar if t0 is None else t0
        if not 0 < t0 <= 1e-2 * fbar:
            raise SeedingError("t0 too large for the singular-orbit expansion", t0=t0, fbar=fbar)

        a, b = SeedingService.profile_taylor(params, fbar)
        state = ProfileState(
            f1=t0 + b * t0**3,
            df1=1 + 3 * b * t0**2,
            f2=fbar + 0.5 * a * t0**2,
            df2=a * t0,
        )

        if check:
            difference = SeedingService.profile_self_check(params, fbar, t0, controls=controls)
            limit = 10 * (controls or IntegrationControls.from_settings()).rel_tol
            if difference > limit:
                raise SeedingError("t0 too large: halving t0 moves the solution", difference=difference)
        return state

    @staticmethod
    def profile_self_check(params, fbar, t0=None, t_check=0.3, controls=None):
        """|f1(t_check; t0) - f1(t_check; t0/2)|."""
        t0 = settings.LAB_PROFILE_T0_FACTOR * fbar if t0 is None else t0
        controls = (controls or IntegrationControls.from_settings()).updated(s_max=t_check)
        values = []
        for start in (t0, t0 / 2):
            state = SeedingService.seed_profile(params, fbar, t0=start)
            trajectory = IntegrationService.integrate(
                params, 'profile', state, controls=replace(controls, detect_convergence=False), s0=start
            )
            if trajectory.final_s < t_check:
                raise SeedingError("profile collapsed before the self-check time", t=trajectory.final_s)
            values.append(trajectory.final_state[0])
        return abs(values[0] - values[1])

    @staticmethod
    def shoot_profile(params, fbar, controls=None, stop_at_max_volume=True, t0=None, check=False):
        """Seed and integrate a profile in Einstein mode."""
        controls = controls or IntegrationControls.from_settings()
        state = SeedingService.seed_profile(params, fbar, t0=t0, check=check, controls=controls)
        start = settings.LAB_PROFILE_T0_FACTOR * fbar if t0 is None else t0
        stop_at = (EventKind.MAX_VOLUME_ORBIT,) if stop_at_max_volume else ()
        return IntegrationService.integrate(
            params,
            'profile',
            state,
            controls=replace(controls, detect_convergence=False),
            s0=start,
            stop_at=stop_at,
        )
