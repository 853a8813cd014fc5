"""
Tests for asymptotics, cone approach, searches, metric reconstruction and
the monotonicity suites.
"""

import math

import numpy as np
import pytest

from apps.analysis.reports import Regime, Verdict
from apps.analysis.services import (
    AsymptoticsService,
    CompletenessService,
    ConeApproachService,
    MetricService,
    MonotonicityService,
    SearchService,
)
from apps.core.exceptions import ConfigurationError, NotApplicableError
from apps.dynamics.states import PolynomialState
from apps.geometry.params import Preset
from apps.geometry.services import PresetService
from apps.integrator.controls import Locus
from apps.integrator.events import EventKind, Trajectory
from apps.integrator.services import IntegrationService, SeedingService
from tests.factories import (
    CircleBundleParamsFactory,
    IntegrationControlsFactory,
    ShootSpecFactory,
    TwoSummandsParamsFactory,
)


def shoot(params, coefficients=(0.0, 1.0, 1.0), **controls):
    """Seed at the initial critical point on the locus matching C and integrate."""
    locus = Locus.SOLITON if params.C < 0 else Locus.EINSTEIN
    state = SeedingService.seed_unstable(params, ShootSpecFactory(coefficients=coefficients, locus=locus))
    return IntegrationService.integrate(params, 'rescaled', state, IntegrationControlsFactory(**controls))


@pytest.fixture(scope='module')
def ricci_flat_hp1():
    params = PresetService.resolve(Preset('hp'))
    return params, shoot(params, s_max=200.0, detect_convergence=False)


class TestAsymptotics:
    @pytest.mark.parametrize(
        'epsilon, C, regime',
        [
            (0.0, -1.0, Regime.STEADY),
            (0.0, 0.0, Regime.RICCI_FLAT),
            (2.0, -1.0, Regime.EXPANDING),
            (2.0, 0.0, Regime.NEGATIVE_EINSTEIN),
        ],
    )
    def test_regime_of(self, hp1, epsilon, C, regime):
        assert AsymptoticsService.regime_of(hp1.with_constants(epsilon=epsilon, C=C)) is regime

    def test_no_regime_for_positive_scalar_curvature(self, hp1):
        with pytest.raises(ConfigurationError):
            AsymptoticsService.regime_of(hp1.with_constants(epsilon=-1.0))

    def test_ricci_flat_limits(self, hp1):
        trajectory = shoot(hp1, s_max=300.0)
        report = AsymptoticsService.verify_asymptotics(hp1, trajectory)

        assert report.regime is Regime.RICCI_FLAT
        assert report.all_passed, report.failures()
        assert report.targets['X1'] == pytest.approx(1 / 7)
        assert report.as_dict()['passed'] == {name: True for name in ('X1', 'X2', 'Y1', 'Y2')}

    def test_negative_einstein_limits(self, hp1):
        params = hp1.with_constants(epsilon=2.0)
        trajectory = shoot(params, s_max=300.0, detect_convergence=False)
        report = AsymptoticsService.verify_asymptotics(params, trajectory)
        assert report.targets['L'] == pytest.approx(math.sqrt(1 / 7))
        assert report.all_passed, report.failures()

    @pytest.mark.slow
    def test_steady_potential_scale(self, hp1):
        """L approaches 1/sqrt(-C) like 1 - n/s, so the horizon must be long."""
        params = hp1.with_constants(C=-1.0)
        trajectory = shoot(params, s_max=2e4, detect_convergence=False)
        report = AsymptoticsService.verify_asymptotics(params, trajectory)
        assert report.passed['L']
        assert report.passed['X1']
        assert report.passed['X2']

    def test_regime_must_match_the_constants(self, ricci_flat_hp1):
        params, trajectory = ricci_flat_hp1
        with pytest.raises(ConfigurationError, match='does not match'):
            AsymptoticsService.verify_asymptotics(params, trajectory, regime='steady')

    def test_needs_a_trajectory_that_ran_to_its_horizon(self, hp1):
        trajectory = Trajectory(
            params=hp1,
            system='rescaled',
            names=PolynomialState.NAMES,
            s=np.array([0.0, 1.0]),
            y=np.zeros((2, 8)),
            events=(),
            termination=EventKind.BLOW_UP,
        )
        with pytest.raises(ConfigurationError):
            AsymptoticsService.verify_asymptotics(hp1, trajectory)

    def test_sup_distance(self, ricci_flat_hp1):
        _, trajectory = ricci_flat_hp1
        assert AsymptoticsService.sup_distance(trajectory, trajectory) == 0.0

    def test_circle_bundle_ratio_stays_below_threshold(self):
        bundle = CircleBundleParamsFactory()
        params = bundle.to_two_summands()
        trajectory = shoot(params, s_max=50.0, detect_convergence=False)
        ratio = AsymptoticsService.bundle_ratio(bundle, trajectory)
        assert ratio['threshold'] == 4.0
        assert ratio['max'] < ratio['threshold']


@pytest.mark.slow
class TestConeApproach:
    @pytest.mark.parametrize(
        'd1, d2, spiral',
        [(2, 2, True), (2, 3, True), (3, 3, True), (3, 4, True), (4, 4, True), (4, 5, False), (5, 5, False)],
    )
    def test_rotation_count(self, d1, d2, spiral):
        params = TwoSummandsParamsFactory(warped=True, d1=d1, d2=d2)
        trajectory = shoot(
            params, s_max=300.0, rel_tol=1e-12, abs_tol=1e-14, max_step=0.5, detect_convergence=False
        )
        count = ConeApproachService.rotation_count(params, trajectory)
        if spiral:
            assert count >= 3
        else:
            assert count <= 1

    def test_spiral_spacing(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=2)
        trajectory = shoot(
            params, s_max=300.0, rel_tol=1e-12, abs_tol=1e-14, max_step=0.5, detect_convergence=False
        )
        crossings = ConeApproachService.crossing_times(params, trajectory)
        predicted = ConeApproachService.predicted_spacing(params)
        spacing = float(np.median(np.diff(crossings)[1:5]))
        assert abs(spacing - predicted) / predicted < 0.2

    def test_nodes_have_no_spacing(self, cap):
        assert ConeApproachService.predicted_spacing(cap) is None

    @pytest.mark.parametrize('name, m', [('hp', 1), ('f', 1)])
    def test_first_family_members_are_straight_lines(self, name, m):
        params = PresetService.resolve(Preset(name, m))
        trajectory = shoot(params, s_max=300.0)
        assert ConeApproachService.collinearity_test(params, trajectory) < 1e-5

    def test_larger_family_members_bend(self):
        params = PresetService.resolve(Preset('hp', 2))
        trajectory = shoot(params, s_max=300.0)
        assert ConeApproachService.collinearity_test(params, trajectory) > 1e-3


class TestMonotonicity:
    def test_monotone_with_slack(self):
        check = MonotonicityService.monotone('v', [3.0, 2.0, 2.0 + 1e-12, 1.0], increasing=False, slack=1e-10)
        assert check.holds
        assert check.samples == 3

        broken = MonotonicityService.monotone('v', [3.0, 2.0, 2.5], increasing=False, slack=1e-10)
        assert not broken.holds
        assert broken.worst_violation == pytest.approx(0.5)

    def test_monotone_skips_masked_and_infinite_samples(self):
        values = [math.nan, 1.0, 2.0, 0.5]
        check = MonotonicityService.monotone('v', values, increasing=True, mask=[True, True, True, False])
        assert check.holds
        assert check.samples == 1

    def test_ricci_flat_suite(self, ricci_flat_hp1):
        params, trajectory = ricci_flat_hp1
        checks = MonotonicityService.lyapunov_suite(params, trajectory)
        assert set(checks) == {'K', 'F0', 'L', 'G'}
        for name, check in checks.items():
            assert check.holds, (name, check.worst_violation)

    def test_steady_suite(self, hp1):
        params = hp1.with_constants(C=-1.0)
        trajectory = shoot(params, s_max=100.0, detect_convergence=False)
        checks = MonotonicityService.lyapunov_suite(params, trajectory)
        assert set(checks) == {'K', 'L', 'trace'}
        for name, check in checks.items():
            assert check.holds, (name, check.worst_violation)

    def test_positive_einstein_suite_skips_f0(self, hp1):
        params = hp1.with_constants(epsilon=-1.0)
        trajectory = shoot(params, s_max=2.0, detect_convergence=False)
        checks = MonotonicityService.lyapunov_suite(params, trajectory)
        assert set(checks) == {'K'}

    def test_trace_bound(self, ricci_flat_hp1):
        params, trajectory = ricci_flat_hp1
        assert MonotonicityService.trace_bound(params, trajectory) < 1e-8

    def test_expanding_potential(self, hp1):
        params = hp1.with_constants(epsilon=2.0, C=-1.0)
        trajectory = shoot(params, s_max=50.0, detect_convergence=False)
        for name, check in MonotonicityService.expanding_potential(params, trajectory).items():
            assert check.holds, name

    def test_circle_bundle_functional(self):
        bundle = CircleBundleParamsFactory()
        params = bundle.to_two_summands()
        trajectory = shoot(params, s_max=50.0, detect_convergence=False)
        check = MonotonicityService.omega_tilde_monotone(bundle, trajectory)
        assert check.holds
        assert check.samples > 0

    def test_trapping_needs_a_positive_discriminant(self):
        params = PresetService.resolve(Preset('f', 1))
        trajectory = shoot(params, s_max=10.0)
        with pytest.raises(NotApplicableError):
            MonotonicityService.trapping(params, trajectory)

    def test_trapping_needs_a_hyperbolic_start(self):
        params = PresetService.resolve(Preset('cp'))
        trajectory = shoot(params, s_max=10.0)
        with pytest.raises(NotApplicableError):
            MonotonicityService.trapping(params, trajectory)

    @pytest.mark.slow
    @pytest.mark.parametrize('preset', ['hp1', 'cap'])
    @pytest.mark.parametrize('epsilon, C', [(0.0, -1.0), (0.0, 0.0), (2.0, -1.0), (2.0, 0.0)])
    @pytest.mark.parametrize('coefficients', [(0.0, 1.0, 1.0), (0.0, 1.0, 0.2), (0.0, 0.2, 1.0)])
    def test_trapping_region_is_preserved(self, request, preset, epsilon, C, coefficients):
        params = request.getfixturevalue(preset).with_constants(epsilon=epsilon, C=C)
        trajectory = shoot(params, coefficients, s_max=100.0, detect_convergence=False)

        assert trajectory.termination is EventKind.HORIZON_REACHED
        for name, check in MonotonicityService.trapping(params, trajectory).items():
            assert check.holds, (name, check.worst_violation)


class TestCompleteness:
    def test_ricci_flat_evidence(self, ricci_flat_hp1):
        params, trajectory = ricci_flat_hp1
        report = CompletenessService.completeness_diagnostic(params, trajectory)
        assert report.verdict is Verdict.COMPLETE_EVIDENCE
        assert report.t_end > 1e3
        assert all(report.checks.values())

    def test_negative_einstein_evidence(self, hp1):
        params = hp1.with_constants(epsilon=2.0)
        trajectory = shoot(params, s_max=3000.0, detect_convergence=False)
        report = CompletenessService.completeness_diagnostic(params, trajectory)
        assert report.verdict is Verdict.COMPLETE_EVIDENCE, report.reason

    def test_positive_epsilon_is_inconclusive(self, hp1):
        params = hp1.with_constants(epsilon=-1.0)
        trajectory = shoot(params, s_max=10.0)
        report = CompletenessService.completeness_diagnostic(params, trajectory)
        assert report.verdict is Verdict.INCONCLUSIVE
        assert report.reason

    def test_short_runs_are_inconclusive(self, hp1):
        report = CompletenessService.completeness_diagnostic(hp1, shoot(hp1, s_max=10.0))
        assert report.verdict is Verdict.INCONCLUSIVE
        assert 't_threshold' in report.reason


class TestMetricReconstruction:
    def test_rescaled_trajectory(self, ricci_flat_hp1):
        params, trajectory = ricci_flat_hp1
        profile = MetricService.reconstruct_metric(params, trajectory)

        assert len(profile) > 10
        assert np.all(np.diff(profile.t) > 0)
        assert np.all(profile.f1 > 0)
        assert np.all(profile.f2 > 0)
        assert np.max(np.abs(profile.du)) < 1e-6
        assert np.max(np.abs(profile.R)) < 1e-12
        assert profile.rows().shape == (len(profile), 8)

    def test_profile_trajectory(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=3, positive_einstein=True)
        trajectory = SeedingService.shoot_profile(params, 1.0, IntegrationControlsFactory(s_max=1.0))
        profile = MetricService.reconstruct_metric(params, trajectory)

        np.testing.assert_allclose(profile.f1, np.sin(profile.t), atol=1e-8)
        np.testing.assert_allclose(profile.R, 30.0)

    def test_needs_phase_columns(self, hp1):
        trajectory = Trajectory(
            params=hp1,
            system='hat',
            names=('hX1', 'hX2', 'hY1', 'hY2', 'hL'),
            s=np.array([0.0]),
            y=np.ones((1, 5)),
            events=(),
            termination=EventKind.HORIZON_REACHED,
        )
        with pytest.raises(ConfigurationError):
            MetricService.reconstruct_metric(hp1, trajectory)


class TestSearches:
    def test_probe_round_sphere(self):
        params = SearchService.normalized(TwoSummandsParamsFactory(warped=True, d1=2, d2=2))
        probe = SearchService.probe(params, 1.0, IntegrationControlsFactory())
        assert probe.t_max_volume == pytest.approx(math.pi / 4, abs=1e-8)
        assert probe.g == pytest.approx(2.0, rel=1e-7)
        assert probe.count == 0

    def test_twist(self):
        assert SearchService.twist(np.array([1.0, 2.0, 3.0, 4.0])).tolist() == [3.0, -4.0, 1.0, -2.0]

    def test_sphere_params(self):
        first, second = SearchService.sphere_params(2, 3)
        assert (first.d1, first.d2, second.d1, second.d2) == (2, 3, 3, 2)
        assert first.epsilon == second.epsilon == -10.0
        with pytest.raises(ConfigurationError):
            SearchService.sphere_params(1, 3)

    def test_round_sphere_matches_itself(self):
        residual, t1, T1 = SearchService.match_residual(2, 3, 1.0, 1.0, IntegrationControlsFactory())
        assert np.max(np.abs(residual)) < 1e-8
        assert t1 + T1 == pytest.approx(math.pi / 2, abs=1e-8)

    def test_grid_validation(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=2)
        with pytest.raises(ConfigurationError):
            SearchService.symmetric_search(params, (0.0, 1.0))
        with pytest.raises(ConfigurationError):
            SearchService.symmetric_search(params, (0.5, 1.0), n_grid=1)

    @pytest.mark.parametrize('bounds', [(0.5, 0.5), (1.0, 0.5)])
    def test_empty_range_finds_nothing(self, bounds):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=2)
        assert SearchService.symmetric_search(params, bounds) == []
        assert SearchService.sphere_match(2, 3, bounds, (0.5, 2.0)) == []
        assert SearchService.sphere_match(2, 3, (0.5, 2.0), bounds) == []

    @pytest.mark.slow
    def test_symmetric_search(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=2)
        solutions = SearchService.symmetric_search(params, (0.01, 1.0), controls=IntegrationControlsFactory())
        assert solutions
        for solution in solutions:
            assert 0.01 <= solution.fbar <= 1.0
            assert solution.residual < 1e-8
        fbars = [solution.fbar for solution in solutions]
        assert len(set(fbars)) == len(fbars)

    @pytest.mark.slow
    def test_sphere_match_finds_the_round_sphere(self):
        matches = SearchService.sphere_match(
            2, 3, (0.5, 2.0), (0.5, 2.0), n_grid=12, controls=IntegrationControlsFactory(), workers=2
        )
        assert any(abs(match.fbar - 1) < 1e-6 and abs(match.Fbar - 1) < 1e-6 for match in matches)
        for match in matches:
            assert match.residual < 1e-6
            assert match.continuity < 1e-5
        assert matches == sorted(matches, key=lambda match: (match.fbar, match.Fbar))
