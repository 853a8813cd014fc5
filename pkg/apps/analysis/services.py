"""
Analysis services for the soliton lab.
Handles asymptotic limits, rotation around cone points, symmetric and
sphere-matching searches, metric reconstruction and monotonicity suites.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq, root

from apps.analysis.reports import (
    AsymptoticsReport,
    CompletenessReport,
    MatchResult,
    MetricProfile,
    MonotoneCheck,
    Regime,
    SymmetricSolution,
    Verdict,
)
from apps.core.exceptions import ConfigurationError, NotApplicableError, SearchError
from apps.dynamics.services import ProfileService, ResidualService
from apps.dynamics.states import PhaseState, ProfileState
from apps.geometry.params import StabilityClass, TwoSummandsParams
from apps.geometry.services import AlgebraService, ConeService
from apps.integrator.controls import IntegrationControls
from apps.integrator.events import EventKind
from apps.integrator.services import BRENT_RTOL, IntegrationService, SeedingService

logger = logging.getLogger(__name__)

PHASE_NAMES = ('X1', 'X2', 'Y1', 'Y2')
SYMMETRIC_TOL = 1e-8
CONTINUITY_TOL = 1e-5
CONTINUITY_FRACTION = 0.1
DEFAULT_GRID = 24


def _fan_out(function, items, workers=1):
    """Map in order; results are merged by input position whatever the worker count."""
    if workers <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, items))


def _require_columns(trajectory, names):
    missing = [name for name in names if name not in trajectory.names]
    if missing:
        raise ConfigurationError(
            f"{trajectory.system} trajectories carry no {', '.join(missing)}",
            system=trajectory.system,
        )


def _geometric_grid(bounds, size, name):
    low, high = (float(value) for value in bounds)
    if not (low > 0 and high > 0):
        raise ConfigurationError(f"{name} range bounds must be positive", low=low, high=high)
    if size < 2:
        raise ConfigurationError("a search grid needs at least two points", size=size)
    if low >= high:
        logger.info(f"Empty {name} range [{low:g}, {high:g}], nothing to search")
        return np.empty(0)
    return np.geomspace(low, high, int(size))


class AsymptoticsService:
    """Limits of trajectories as s grows."""

    @staticmethod
    def regime_of(params):
        eps, C = params.epsilon, params.C
        if eps == 0 and C < 0:
            return Regime.STEADY
        if eps == 0 and C == 0:
            return Regime.RICCI_FLAT
        if eps > 0 and C < 0:
            return Regime.EXPANDING
        if eps > 0 and C == 0:
            return Regime.NEGATIVE_EINSTEIN
        raise ConfigurationError("no asymptotic regime for these constants", epsilon=eps, C=C)

    @staticmethod
    def targets(params, regime):
        n = params.n
        if regime is Regime.STEADY:
            return {'X1': 0.0, 'X2': 0.0, 'Y1': 0.0, 'Y2': 0.0, 'L': 1 / math.sqrt(-params.C)}
        if regime is Regime.RICCI_FLAT:
            cone = ConeService.first_cone(params)
            return {'X1': 1 / n, 'X2': 1 / n, 'Y1': 1 / (n * cone.c1), 'Y2': 1 / (n * cone.c2)}
        if regime is Regime.EXPANDING:
            return {name: 0.0 for name in ('X1', 'X2', 'Y1', 'Y2', 'L')}
        return {
            'X1': 1 / n,
            'X2': 1 / n,
            'Y1': 0.0,
            'Y2': 0.0,
            'L': math.sqrt(2 / (n * params.epsilon)),
        }

    @staticmethod
    def verify_asymptotics(params, trajectory, regime=None, tolerance=None, window=None):
        """
        Compare trailing-window means with the limits of the regime.

        The regime must be the one the constants (epsilon, C) select.
        """
        expected = AsymptoticsService.regime_of(params)
        regime = expected if regime is None else Regime(regime)
        if regime is not expected:
            raise ConfigurationError(
                f"regime {regime.value} does not match epsilon={params.epsilon}, C={params.C}",
                expected=expected.value,
            )
        if trajectory.termination not in (EventKind.CONVERGED, EventKind.HORIZON_REACHED):
            raise ConfigurationError(
                "asymptotics need a trajectory that ran to its horizon",
                termination=trajectory.termination.value,
            )

        tolerance = settings.LAB_ASYMPTOTICS_TOL if tolerance is None else tolerance
        window = settings.LAB_CONVERGENCE_WINDOW if window is None else window
        targets = AsymptoticsService.targets(params, regime)
        _require_columns(trajectory, targets)

        mask = trajectory.trailing(window)
        observed = {name: float(np.mean(trajectory.column(name)[mask])) for name in targets}
        passed = {name: abs(observed[name] - targets[name]) < tolerance for name in targets}

        final = trajectory.final_state
        Y1, Y2 = final[trajectory.names.index('Y1')], final[trajectory.names.index('Y2')]
        monitors = {'omega': Y2 / Y1 if Y1 > 0 else math.nan}

        report = AsymptoticsReport(
            regime=regime,
            observed=observed,
            targets=targets,
            passed=passed,
            tolerance=tolerance,
            horizon=trajectory.final_s,
            window=window,
            monitors=monitors,
        )
        if report.all_passed:
            logger.info(f"✅ {regime.value} limits reached by s={trajectory.final_s:.6g}")
        else:
            logger.info(f"⚠️ {regime.value} limits not reached: {', '.join(report.failures())}")
        return report

    @staticmethod
    def bundle_ratio(bundle, trajectory):
        """Y2^2/Y1^2 along a circle-bundle trajectory against 4p/((d+2)q^2)."""
        ratio = (trajectory.column('Y2') / trajectory.column('Y1')) ** 2
        return {
            'threshold': 4 * bundle.p / ((bundle.d + 2) * bundle.q**2),
            'max': float(np.max(ratio)),
            'final': float(ratio[-1]),
        }

    @staticmethod
    def sup_distance(first, second, names=PHASE_NAMES):
        """Sup-distance of two trajectories on the overlap of their s ranges."""
        end = min(first.final_s, second.final_s)
        grid = first.s[first.s <= end]
        worst = 0.0
        for name in names:
            other = np.interp(grid, second.s, second.column(name))
            worst = max(worst, float(np.max(np.abs(first.column(name)[: len(grid)] - other))))
        return worst


class ConeApproachService:
    """Behaviour of trajectories near the stationary point of a cone solution."""

    @staticmethod
    def crossing_times(params, trajectory, cone=None, radius=None, floor=1e-14):
        """
        Interpolated s of the sign changes of X1 - 1/n inside the ball of the
        given radius around the cone point. The radius defaults to the
        distance between the initial critical point and the cone point.
        """
        cone = cone or ConeService.first_cone(params)
        point = dict(zip(PHASE_NAMES, ConeService.cone_point(params, cone)))
        start = {'X1': 1 / params.d1, 'X2': 0.0, 'Y1': 1 / params.d1, 'Y2': 0.0}
        coords = [name for name in PHASE_NAMES if name in trajectory.names]

        if radius is None:
            radius = math.sqrt(sum((start[name] - point[name]) ** 2 for name in coords))
        distance = np.sqrt(sum((trajectory.column(name) - point[name]) ** 2 for name in coords))

        g = trajectory.column('X1') - 1 / params.n
        keep = (distance <= radius) & (np.abs(g) > floor)
        s, g = trajectory.s[keep], g[keep]

        changes = np.nonzero(np.sign(g[1:]) != np.sign(g[:-1]))[0]
        return [
            float(s[i] + (s[i + 1] - s[i]) * g[i] / (g[i] - g[i + 1]))
            for i in changes
        ]

    @staticmethod
    def rotation_count(params, trajectory, cone=None, radius=None, floor=1e-14):
        return len(ConeApproachService.crossing_times(params, trajectory, cone, radius, floor))

    @staticmethod
    def predicted_spacing(params, cone=None):
        """pi/|Im l| between consecutive crossings near a spiral; None for a node."""
        cone = cone or ConeService.first_cone(params)
        stability = ConeService.classify_cone_stability(params, cone)
        if stability.kind is StabilityClass.NODE:
            return None
        return math.pi / stability.rotation_rate

    @staticmethod
    def collinearity_test(params, trajectory, cone=None):
        """
        Largest distance of (X1 - 1/n, Y1 - 1/(n c1)) from the line through the
        origin and the initial critical point in the same coordinates.
        """
        cone = cone or ConeService.first_cone(params)
        n, d1 = params.n, params.d1
        target_y = 1 / (n * cone.c1)
        direction = np.array([1 / d1 - 1 / n, 1 / d1 - target_y])
        direction /= np.linalg.norm(direction)

        x = trajectory.column('X1') - 1 / n
        y = trajectory.column('Y1') - target_y
        deviation = np.abs(x * direction[1] - y * direction[0])
        return float(np.max(deviation))


@dataclass(frozen=True)
class _Probe:
    fbar: float
    g: float
    count: int
    t_max_volume: float
    state: np.ndarray


class SearchService:
    """Shooting searches on profile trajectories with eps = -2n."""

    @staticmethod
    def normalized(params):
        return params.with_constants(epsilon=-2.0 * params.n, C=0.0)

    @staticmethod
    def probe(params, fbar, controls=None, check=False):
        """Shoot to the maximal volume orbit and read off the omega-dot sign function."""
        trajectory = SeedingService.shoot_profile(params, fbar, controls, check=check)
        event = trajectory.first_event(EventKind.MAX_VOLUME_ORBIT)
        if event is None:
            raise SearchError(
                "profile never reached the maximal volume orbit",
                fbar=fbar,
                termination=trajectory.termination.value,
            )
        f1, df1, f2, df2 = event.state[:4]
        return _Probe(
            fbar=float(fbar),
            g=float(df1 / f1 - df2 / f2),
            count=IntegrationService.count_omega_critical(trajectory),
            t_max_volume=float(event.s),
            state=np.array(event.state[:4]),
        )

    @staticmethod
    def _brackets(params, left, right, controls, depth):
        if left.g * right.g <= 0:
            return [(left, right)]
        if depth == 0 or abs(right.count - left.count) < 2:
            return []
        # an even jump of the count hides a pair of roots
        middle = SearchService.probe(params, math.sqrt(left.fbar * right.fbar), controls)
        logger.debug(f"Subdividing [{left.fbar:.6g}, {right.fbar:.6g}] at {middle.fbar:.6g}")
        return SearchService._brackets(params, left, middle, controls, depth - 1) + SearchService._brackets(
            params, middle, right, controls, depth - 1
        )

    @staticmethod
    def symmetric_search(params, fbar_range, n_grid=DEFAULT_GRID, controls=None, max_depth=6, workers=1):
        """
        fbar values whose profile has f1' = f2' = 0 at the maximal volume orbit.

        Brackets come from sign changes of omega-dot there, and from jumps of
        the omega-critical count by two or more, which are subdivided. Every
        root is re-shot with tightened tolerances and kept only when both
        derivatives vanish to SYMMETRIC_TOL. An empty list means no bracket.
        """
        params = SearchService.normalized(params)
        controls = controls or IntegrationControls.from_settings()
        grid = _geometric_grid(fbar_range, n_grid, 'fbar')
        probes = _fan_out(lambda fbar: SearchService.probe(params, fbar, controls), grid, workers)

        brackets = []
        for left, right in zip(probes, probes[1:]):
            brackets.extend(SearchService._brackets(params, left, right, controls, max_depth))
        logger.info(f"🔍 {len(brackets)} brackets for symmetric profiles in {tuple(fbar_range)}")

        tight = controls.tightened(10.0)
        solutions = []
        for left, right in brackets:
            if left.g == 0:
                fbar = left.fbar
            elif right.g == 0:
                fbar = right.fbar
            else:
                fbar = brentq(
                    lambda value: SearchService.probe(params, value, controls).g,
                    left.fbar,
                    right.fbar,
                    xtol=1e-14 * left.fbar,
                    rtol=BRENT_RTOL,
                )
            if any(abs(fbar - found.fbar) <= 1e-9 * fbar for found in solutions):
                continue

            SeedingService.seed_profile(params, fbar, check=True, controls=controls)
            check = SearchService.probe(params, fbar, tight)
            residual = max(abs(check.state[1]), abs(check.state[3]))
            if residual >= SYMMETRIC_TOL:
                logger.warning(f"⚠️ Rejected symmetric candidate fbar={fbar:.12g}: |f'|={residual:.2e}")
                continue
            logger.info(f"✅ Symmetric profile at fbar={fbar:.12g}")
            solutions.append(
                SymmetricSolution(
                    fbar=fbar,
                    t_max_volume=check.t_max_volume,
                    residual=residual,
                    critical_count=check.count,
                )
            )

        if not solutions:
            logger.warning(f"⚠️ No symmetric profile found for fbar in {tuple(fbar_range)}")
        return solutions

    @staticmethod
    def sphere_params(d1, d2):
        """
        The pair of parameter sets glued in the sphere construction: unit
        spheres of dimensions d1 and d2 with Ric = (d-1) g, eps/2 = -n, and
        the same data with the roles swapped.
        """
        if d1 < 2 or d2 < 2:
            raise ConfigurationError("sphere matching needs d1, d2 >= 2", d1=d1, d2=d2)
        n = d1 + d2
        first = TwoSummandsParams(
            d1=d1, d2=d2, A1=d1 * (d1 - 1), A2=d2 * (d2 - 1), A3=0.0, epsilon=-2.0 * n
        )
        second = TwoSummandsParams(
            d1=d2, d2=d1, A1=d2 * (d2 - 1), A2=d1 * (d1 - 1), A3=0.0, epsilon=-2.0 * n
        )
        return first, second

    @staticmethod
    def twist(state):
        """(F1, F1', F2, F2') -> (F2, -F2', F1, -F1')."""
        return np.array([state[2], -state[3], state[0], -state[1]])

    @staticmethod
    def match_residual(d1, d2, fbar, Fbar, controls=None):
        """Slice mismatch of c_fbar against the twisted d_Fbar, with both slice times."""
        first, second = SearchService.sphere_params(d1, d2)
        left = SearchService.probe(first, fbar, controls)
        right = SearchService.probe(second, Fbar, controls)
        return left.state - SearchService.twist(right.state), left.t_max_volume, right.t_max_volume

    @staticmethod
    def _continuity(first, second, fbar, Fbar, t1, T1, slice_state, controls):
        """
        Continue c_fbar past its slice and compare with the twisted d_Fbar
        run backwards by the same amount.
        """
        tau = CONTINUITY_FRACTION * min(t1, T1)
        glued = ProfileState(*slice_state)
        onward = IntegrationService.integrate(
            first,
            'profile',
            glued,
            controls=controls.updated(s_max=t1 + tau, detect_convergence=False),
            s0=t1,
        )
        if onward.final_s < t1 + tau - 1e-12:
            return math.inf
        backward = SeedingService.shoot_profile(
            second, Fbar, controls.updated(s_max=T1 - tau), stop_at_max_volume=False
        )
        if backward.final_s < T1 - tau - 1e-12:
            return math.inf
        difference = onward.final_state[:4] - SearchService.twist(backward.final_state[:4])
        return float(np.max(np.abs(difference)))

    @staticmethod
    def _intersections(P, Q):
        """Crossings of two polylines as (i, a, j, b) with P_i + a(P_i+1 - P_i) = Q_j + b(...)."""
        found = []
        for i in range(len(P) - 1):
            p, r = P[i], P[i + 1] - P[i]
            for j in range(len(Q) - 1):
                q, s = Q[j], Q[j + 1] - Q[j]
                denominator = r[0] * s[1] - r[1] * s[0]
                if denominator == 0:
                    continue
                offset = q - p
                a = (offset[0] * s[1] - offset[1] * s[0]) / denominator
                b = (offset[0] * r[1] - offset[1] * r[0]) / denominator
                if 0 <= a <= 1 and 0 <= b <= 1:
                    found.append((i, a, j, b))
        return found

    @staticmethod
    def sphere_match(d1, d2, fbar_range, Fbar_range, n_grid=DEFAULT_GRID, controls=None, match_tol=None, workers=1):
        """
        Parameter pairs (fbar, Fbar) where c_fbar and the twisted d_Fbar meet
        on the maximal volume slice, so the two halves glue to a metric on
        the sphere of dimension d1 + d2 + 1.
        """
        match_tol = settings.LAB_MATCH_TOL if match_tol is None else match_tol
        controls = controls or IntegrationControls.from_settings()
        first, second = SearchService.sphere_params(d1, d2)
        fbars = _geometric_grid(fbar_range, n_grid, 'fbar')
        Fbars = _geometric_grid(Fbar_range, n_grid, 'Fbar')
        if not (len(fbars) and len(Fbars)):
            logger.warning(f"⚠️ Empty search range for d1={d1}, d2={d2}, no sphere matches")
            return []

        left = _fan_out(lambda value: SearchService.probe(first, value, controls), fbars, workers)
        right = _fan_out(lambda value: SearchService.probe(second, value, controls), Fbars, workers)
        P = np.array([[probe.state[0], probe.state[2]] for probe in left])
        Q = np.array([[probe.state[2], probe.state[0]] for probe in right])
        candidates = SearchService._intersections(P, Q)
        logger.info(f"🔍 {len(candidates)} slice crossings for d1={d1}, d2={d2}")

        def mismatch(x):
            a = SearchService.probe(first, math.exp(x[0]), controls).state
            b = SearchService.twist(SearchService.probe(second, math.exp(x[1]), controls).state)
            return [math.log(a[0] / b[0]), math.log(a[2] / b[2])]

        results = []
        for i, a, j, b in candidates:
            guess = [
                math.log(fbars[i]) + a * math.log(fbars[i + 1] / fbars[i]),
                math.log(Fbars[j]) + b * math.log(Fbars[j + 1] / Fbars[j]),
            ]
            solution = root(mismatch, guess, method='hybr')
            if not solution.success:
                logger.debug(f"Slice crossing near {np.exp(guess)} did not refine: {solution.message}")
                continue
            fbar, Fbar = (float(value) for value in np.exp(solution.x))
            if any(
                abs(fbar - found.fbar) <= 1e-6 * fbar and abs(Fbar - found.Fbar) <= 1e-6 * Fbar
                for found in results
            ):
                continue

            c_probe = SearchService.probe(first, fbar, controls, check=True)
            d_probe = SearchService.probe(second, Fbar, controls, check=True)
            residual = float(np.max(np.abs(c_probe.state - SearchService.twist(d_probe.state))))
            if residual >= match_tol:
                logger.debug(f"Slice crossing ({fbar:.6g}, {Fbar:.6g}) misses in f': {residual:.2e}")
                continue

            continuity = SearchService._continuity(
                first,
                second,
                fbar,
                Fbar,
                c_probe.t_max_volume,
                d_probe.t_max_volume,
                np.append(c_probe.state, [0.0, 0.0]),
                controls,
            )
            if continuity >= CONTINUITY_TOL:
                logger.warning(f"⚠️ Match ({fbar:.6g}, {Fbar:.6g}) failed the continuity check: {continuity:.2e}")
                continue

            logger.info(f"✅ Sphere match at fbar={fbar:.12g}, Fbar={Fbar:.12g}")
            results.append(
                MatchResult(
                    fbar=fbar,
                    Fbar=Fbar,
                    t0=settings.LAB_PROFILE_T0_FACTOR * fbar,
                    t1=c_probe.t_max_volume,
                    T1=d_probe.t_max_volume,
                    residual=residual,
                    continuity=continuity,
                )
            )

        results.sort(key=lambda match: (match.fbar, match.Fbar))
        if not results:
            logger.warning(f"⚠️ No sphere match for d1={d1}, d2={d2} in the given ranges")
        return results


class MetricService:
    """Warping functions and curvature recovered from trajectories."""

    @staticmethod
    def reconstruct_metric(params, trajectory):
        """
        Profile table of a rescaled or profile trajectory.

        Rescaled samples give f_i = L/Y_i, f_i' = X_i/Y_i and
        u' = (d1 X1 + d2 X2 - 1)/L; samples with L = 0 are skipped and t is
        kept strictly increasing.
        """
        if trajectory.system == 'profile':
            t = trajectory.s
            f1, df1 = trajectory.column('f1'), trajectory.column('df1')
            f2, df2 = trajectory.column('f2'), trajectory.column('df2')
            u, du = trajectory.column('u'), trajectory.column('du')
        else:
            _require_columns(trajectory, ('X1', 'X2', 'Y1', 'Y2', 'L', 't', 'u'))
            L = trajectory.column('L')
            Y1, Y2 = trajectory.column('Y1'), trajectory.column('Y2')
            keep = (L > 0) & (Y1 > 0) & (Y2 > 0)
            L, Y1, Y2 = L[keep], Y1[keep], Y2[keep]
            X1, X2 = trajectory.column('X1')[keep], trajectory.column('X2')[keep]
            t, u = trajectory.column('t')[keep], trajectory.column('u')[keep]
            f1, f2 = L / Y1, L / Y2
            df1, df2 = X1 / Y1, X2 / Y2
            du = (params.d1 * X1 + params.d2 * X2 - 1) / L

        monotone = np.zeros(len(t), dtype=bool)
        last = -math.inf
        for index, value in enumerate(t):
            if value > last:
                monotone[index] = True
                last = value

        def pick(values):
            return np.asarray(values, dtype=float)[monotone]

        return MetricProfile(
            t=pick(t),
            f1=pick(f1),
            f2=pick(f2),
            df1=pick(df1),
            df2=pick(df2),
            u=pick(u),
            du=pick(du),
            R=ProfileService.scalar_curvature(params, pick(u), pick(du)),
        )


class CompletenessService:
    @staticmethod
    def completeness_diagnostic(params, trajectory, threshold=None, slack=None):
        """
        Evidence that geometric time t is unbounded along a trajectory.

        eps = 0: L must be nondecreasing, hence bounded below by its first
        positive value. eps > 0: (eps/2) L^2 stays below max(1/d1, 1/d2) and L
        stays above L(s0) exp(-int (eps/2) L^2). Either way t at the horizon
        must exceed the threshold with positive growth dt/ds = L.
        """
        threshold = settings.LAB_COMPLETENESS_T_THRESHOLD if threshold is None else threshold
        slack = settings.LAB_MONOTONE_SLACK if slack is None else slack
        _require_columns(trajectory, ('L', 't'))

        L, s = trajectory.column('L'), trajectory.s
        t_end = float(trajectory.column('t')[-1])
        growth = float(L[-1])

        def verdict(checks, reason=''):
            return CompletenessReport(Verdict.INCONCLUSIVE, t_end, growth, checks, reason)

        if trajectory.termination not in (EventKind.CONVERGED, EventKind.HORIZON_REACHED):
            return verdict({}, f"trajectory ended with {trajectory.termination.value}")
        if params.epsilon < 0:
            return verdict({}, "no completeness mechanism for eps < 0")

        positive = L > 0
        if not positive.any():
            return verdict({}, "L never left zero")
        start = int(np.argmax(positive))
        L, s = L[start:], s[start:]

        if params.epsilon == 0:
            check = MonotonicityService.monotone('L', L, increasing=True, slack=slack)
            checks = {
                'L_nondecreasing': check.holds,
                'L_bounded_below': bool(np.all(L >= L[0] * (1 - slack))),
            }
        else:
            half_eps = 0.5 * params.epsilon
            ceiling = max(1 / params.d1, 1 / params.d2)
            integral = cumulative_trapezoid(half_eps * L * L, s, initial=0.0)
            lower = L[0] * np.exp(-integral)
            checks = {
                'L_bounded_above': bool(np.all(half_eps * L * L <= ceiling + 1e-9)),
                'L_lower_bound': bool(np.all(L >= lower * (1 - 1e-6))),
            }

        checks['t_threshold'] = t_end > threshold
        checks['t_growing'] = growth > 0
        if all(checks.values()):
            logger.info(f"✅ Completeness evidence: t={t_end:.6g} at s={trajectory.final_s:.6g}")
            return CompletenessReport(Verdict.COMPLETE_EVIDENCE, t_end, growth, checks)
        failed = ", ".join(name for name, ok in checks.items() if not ok)
        return verdict(checks, f"failed: {failed}")


class MonotonicityService:
    """Sample-to-sample checks of Lyapunov functionals and trapping regions."""

    @staticmethod
    def monotone(name, values, increasing, slack=None, mask=None):
        """
        Differences against the wrong direction are allowed up to
        slack * max(1, |v|). Pairs need both samples finite and inside mask.
        """
        slack = settings.LAB_MONOTONE_SLACK if slack is None else slack
        values = np.asarray(values, dtype=float)
        valid = np.isfinite(values)
        if mask is not None:
            valid &= np.asarray(mask, dtype=bool)
        pairs = valid[1:] & valid[:-1]
        if not pairs.any():
            return MonotoneCheck(name=name, holds=True, worst_violation=0.0, samples=0)

        before, after = values[:-1][pairs], values[1:][pairs]
        wrong = (before - after) if increasing else (after - before)
        allowed = slack * np.maximum(1.0, np.abs(before))
        return MonotoneCheck(
            name=name,
            holds=bool(np.all(wrong <= allowed)),
            worst_violation=float(max(0.0, np.max(wrong))),
            samples=int(pairs.sum()),
        )

    @staticmethod
    def functional_series(params, trajectory):
        """(K, F0, G) at every sample; NaN where Y1 <= 0."""
        series = np.full((len(trajectory), 3), np.nan)
        for index, row in enumerate(trajectory.y):
            state = PhaseState.from_vector(row)
            if not state.Y1 > 0:
                continue
            values = ResidualService.functionals(params, state)
            series[index] = (values.K, values.F0 if not values.F0_infinite else np.nan, values.G)
        return series

    @staticmethod
    def lyapunov_suite(params, trajectory, slack=None):
        """
        K non-increasing while X2 > 0; F0 non-increasing on Einstein
        trajectories with eps >= 0; G non-decreasing on Ricci-flat ones;
        L and, on steady solitons, d1 X1 + d2 X2 monotone when eps = 0.
        """
        _require_columns(trajectory, PHASE_NAMES + ('L',))
        series = MonotonicityService.functional_series(params, trajectory)
        X2 = trajectory.column('X2')
        checks = {
            'K': MonotonicityService.monotone('K', series[:, 0], increasing=False, slack=slack, mask=X2 > 0),
        }
        if params.C == 0 and params.epsilon >= 0:
            checks['F0'] = MonotonicityService.monotone('F0', series[:, 1], increasing=False, slack=slack)
        if params.epsilon == 0:
            L = trajectory.column('L')
            checks['L'] = MonotonicityService.monotone('L', L, increasing=True, slack=slack)
            if params.C == 0:
                checks['G'] = MonotonicityService.monotone('G', series[:, 2], increasing=True, slack=slack)
            else:
                trace = params.d1 * trajectory.column('X1') + params.d2 * X2
                checks['trace'] = MonotonicityService.monotone(
                    'trace', trace, increasing=False, slack=slack, mask=L > 0
                )
        return checks

    @staticmethod
    def trace_bound(params, trajectory):
        """(d1 X1 + d2 X2) t <= n L at samples with t > 0; returns the worst excess."""
        t, L = trajectory.column('t'), trajectory.column('L')
        trace = params.d1 * trajectory.column('X1') + params.d2 * trajectory.column('X2')
        mask = t > 0
        if not mask.any():
            return 0.0
        return float(max(0.0, np.max(trace[mask] * t[mask] - params.n * L[mask])))

    @staticmethod
    def trapping(params, trajectory):
        """
        X2 > 0 and Y2/Y1 below the first root of the trapping polynomial,
        after the seed. Needs D > 0, eps >= 0, C <= 0 and d1 > 1.
        """
        if not (params.d1 > 1 and params.epsilon >= 0 and params.C <= 0):
            raise NotApplicableError("trapping needs d1 > 1, eps >= 0 and C <= 0")
        roots = AlgebraService.omega_hat_roots(params)
        if roots is None:
            raise NotApplicableError("trapping needs a positive discriminant", d_hat=AlgebraService.d_hat(params))

        X2 = trajectory.column('X2')[1:]
        omega = (trajectory.column('Y2') / trajectory.column('Y1'))[1:]
        return {
            'X2_positive': MonotoneCheck(
                name='X2_positive',
                holds=bool(np.all(X2 > 0)),
                worst_violation=float(max(0.0, -np.min(X2))),
                samples=len(X2),
            ),
            'omega_trapped': MonotoneCheck(
                name='omega_trapped',
                holds=bool(np.all(omega < roots[0])),
                worst_violation=float(max(0.0, np.max(omega - roots[0]))),
                samples=len(omega),
            ),
        }

    @staticmethod
    def expanding_potential(params, trajectory, slack=None):
        """u < 0, u' < 0 and u' non-increasing in t after the first sample."""
        profile = MetricService.reconstruct_metric(params, trajectory)
        u, du = profile.u[1:], profile.du[1:]
        return {
            'negative': MonotoneCheck('negative', bool(np.all(u < 0)), float(max(0.0, np.max(u))), len(u)),
            'decreasing': MonotoneCheck('decreasing', bool(np.all(du < 0)), float(max(0.0, np.max(du))), len(du)),
            'concave': MonotonicityService.monotone('concave', du, increasing=False, slack=slack),
        }

    @staticmethod
    def omega_tilde_monotone(bundle, trajectory, slack=None):
        """The circle-bundle functional is non-increasing wherever X1 < 1."""
        values = np.array(
            [ResidualService.ktilde(bundle, PhaseState.from_vector(row)) for row in trajectory.y]
        )
        mask = trajectory.column('X1') < 1
        return MonotonicityService.monotone('Ktilde', values, increasing=False, slack=slack, mask=mask)
