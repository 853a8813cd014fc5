"""
Tests for the integrator: controls, event location, seeding and profile shots.
"""

import math

import numpy as np
import pytest

from apps.core.exceptions import ConfigurationError, DomainExitError, SeedingError
from apps.dynamics.services import KahlerService, ProfileService, ResidualService
from apps.dynamics.states import PhaseState
from apps.geometry.params import MultiWarpedParams
from apps.geometry.services import AlgebraService
from apps.integrator.controls import IntegrationControls, Locus, ShootSpec
from apps.integrator.events import EventKind, EventSpec
from apps.integrator.services import IntegrationService, SeedingService
from apps.integrator.systems import DynamicalSystem, build_system
from tests.factories import (
    CircleBundleParamsFactory,
    IntegrationControlsFactory,
    ShootSpecFactory,
    TwoSummandsParamsFactory,
)


class Decay(DynamicalSystem):
    name = 'decay'
    names = ('x',)

    def rhs(self, s, y):
        return -y


class Oscillator(DynamicalSystem):
    name = 'oscillator'
    names = ('x', 'v')

    def rhs(self, s, y):
        return np.array([y[1], -y[0]])

    def events(self):
        return [EventSpec(EventKind.X2_ZERO, lambda y: y[0])]


class Explosion(DynamicalSystem):
    name = 'explosion'
    names = ('x',)

    def rhs(self, s, y):
        return y * y


class Fenced(DynamicalSystem):
    name = 'fenced'
    names = ('x',)

    def rhs(self, s, y):
        if y[0] > 2:
            raise DomainExitError("outside the fence", x=y[0])
        return np.ones(1)


class TestControls:
    def test_from_settings(self, settings):
        settings.LAB_S_MAX = 75.0
        controls = IntegrationControls.from_settings(rel_tol=1e-8, abs_tol=None)
        assert controls.s_max == 75.0
        assert controls.rel_tol == 1e-8
        assert controls.abs_tol == settings.LAB_ABS_TOL

    def test_tolerance_floor(self):
        with pytest.raises(ConfigurationError):
            IntegrationControlsFactory(rel_tol=1e-15)

    def test_tightened_respects_the_floor(self):
        controls = IntegrationControlsFactory(rel_tol=1e-13, abs_tol=1e-12).tightened(100.0)
        assert controls.rel_tol == 1e-14
        assert controls.abs_tol == pytest.approx(1e-14)

    def test_as_dict_spells_infinity(self, controls):
        assert controls.as_dict()['max_step'] == 'inf'

    def test_horizon_must_lie_ahead(self, controls):
        with pytest.raises(ConfigurationError):
            IntegrationService.integrate(None, Decay(), [1.0], controls, s0=controls.s_max)


class TestShootSpec:
    def test_coefficients_are_normalized(self):
        spec = ShootSpecFactory(coefficients=(0.0, 3.0, 4.0))
        assert spec.coefficients == pytest.approx((0.0, 0.6, 0.8))

    def test_zero_direction(self):
        with pytest.raises(SeedingError):
            ShootSpecFactory(coefficients=(0.0, 0.0, 0.0))

    def test_zero_displacement(self):
        with pytest.raises(SeedingError):
            ShootSpecFactory(delta=0.0)

    def test_displacement_range(self):
        with pytest.raises(ConfigurationError):
            ShootSpecFactory(delta=1e-2)

    def test_default_displacement(self, settings):
        settings.LAB_SEED_DELTA = 1e-6
        assert ShootSpec(coefficients=(0, 1, 0)).delta == 1e-6


class TestIntegration:
    def test_linear_decay(self):
        controls = IntegrationControlsFactory(s_max=5.0)
        trajectory = IntegrationService.integrate(None, Decay(), [1.0], controls)
        assert trajectory.termination is EventKind.HORIZON_REACHED
        assert trajectory.final_s == 5.0
        assert abs(trajectory.final_state[0] - math.exp(-5.0)) < 10 * controls.rel_tol
        assert np.all(np.diff(trajectory.s) > 0)

    def test_events_are_located_on_the_dense_output(self):
        controls = IntegrationControlsFactory(s_max=7.0, detect_convergence=False)
        trajectory = IntegrationService.integrate(None, Oscillator(), [1.0, 0.0], controls)
        zeros = trajectory.events_of(EventKind.X2_ZERO)
        assert [event.s for event in zeros] == pytest.approx(
            [math.pi / 2, 3 * math.pi / 2], abs=1e-8
        )
        assert zeros[0].slope == pytest.approx(-1.0, abs=1e-4)
        assert zeros[1].slope == pytest.approx(1.0, abs=1e-4)

    def test_stop_at_makes_events_terminal(self):
        controls = IntegrationControlsFactory(s_max=7.0, detect_convergence=False)
        trajectory = IntegrationService.integrate(
            None, Oscillator(), [1.0, 0.0], controls, stop_at=[EventKind.X2_ZERO]
        )
        assert trajectory.termination is EventKind.X2_ZERO
        assert trajectory.final_s == pytest.approx(math.pi / 2, abs=1e-8)
        assert trajectory.final_state[0] == pytest.approx(0.0, abs=1e-8)

    def test_blow_up(self):
        controls = IntegrationControlsFactory(s_max=2.0)
        trajectory = IntegrationService.integrate(None, Explosion(), [1.0], controls)
        assert trajectory.termination is EventKind.BLOW_UP
        assert trajectory.final_s < 1.0
        assert trajectory.final_state[0] == pytest.approx(controls.norm_cap, rel=1e-4)

    def test_domain_exit_keeps_the_last_accepted_state(self):
        controls = IntegrationControlsFactory(s_max=5.0, max_step=0.1)
        trajectory = IntegrationService.integrate(None, Fenced(), [0.0], controls)
        assert trajectory.termination is EventKind.DOMAIN_EXIT
        assert trajectory.first_event(EventKind.DOMAIN_EXIT) is not None
        assert trajectory.final_state[0] <= 2.0
        assert trajectory.final_s <= 2.0

    def test_unknown_system(self, hp1):
        with pytest.raises(ConfigurationError, match='unknown system'):
            build_system('spherical', hp1)


class TestUnstableSeeding:
    def test_einstein_seed(self, hp1):
        state = SeedingService.seed_unstable(hp1, ShootSpecFactory())
        S1, S2 = ResidualService.locus_residuals(hp1, state)
        assert abs(S1) < 1e-13
        assert abs(S2) < 1e-13
        assert state.Y2 == pytest.approx(1e-7 / math.sqrt(2))
        assert state.L == pytest.approx(1e-7 / math.sqrt(2))

    def test_soliton_seed(self, hp1):
        params = hp1.with_constants(C=-1.0)
        state = SeedingService.seed_unstable(params, ShootSpecFactory(soliton=True))
        _, S2 = ResidualService.locus_residuals(params, state)
        assert S2 < 0
        assert abs(ResidualService.conservation_residual(params, state)) < 1e-13

    def test_seed_for_non_hyperbolic_start(self):
        params = TwoSummandsParamsFactory(cp=True)
        state = SeedingService.seed_unstable(params, ShootSpecFactory())
        assert state.Y1 == 1.0
        assert abs(ResidualService.conservation_residual(params, state)) < 1e-13

    def test_unconstrained_seed(self, hp1):
        spec = ShootSpecFactory(unconstrained=True)
        state = SeedingService.seed_unstable(hp1, spec)
        a = spec.coefficients[0]
        assert state.X1 == pytest.approx(1 / 3 + 2 * spec.delta * a)
        assert state.Y1 == pytest.approx(1 / 3 + spec.delta * a)

    def test_einstein_seed_needs_vanishing_c(self, hp1):
        with pytest.raises(ConfigurationError) as excinfo:
            SeedingService.seed_unstable(hp1.with_constants(C=-1.0), ShootSpecFactory())
        assert excinfo.value.exit_code == 64

    def test_einstein_seed_is_tangent_to_the_locus(self, hp1):
        with pytest.raises(SeedingError):
            SeedingService.seed_unstable(hp1, ShootSpecFactory(coefficients=(1.0, 1.0, 1.0)))

    def test_soliton_seed_needs_an_l_component(self, hp1):
        with pytest.raises(SeedingError):
            SeedingService.seed_unstable(hp1.with_constants(C=-1.0), ShootSpecFactory(soliton=True, coefficients=(0, 1, 0)))

    def test_negative_l_component(self, hp1):
        with pytest.raises(SeedingError):
            SeedingService.seed_unstable(hp1, ShootSpecFactory(coefficients=(0, 1, -1)))

    def test_y2_sign_is_folded(self, hp1):
        state = SeedingService.seed_unstable(hp1, ShootSpecFactory(coefficients=(0, -1, 1)))
        assert state.Y2 > 0


class TestConservation:
    @pytest.mark.parametrize('preset', ['hp1', 'cap'])
    @pytest.mark.parametrize(
        'epsilon, C',
        [(0.0, -1.0), (0.0, 0.0), (2.0, -1.0), (2.0, 0.0)],
        ids=['steady', 'ricciflat', 'expanding', 'negEinstein'],
    )
    def test_drift_stays_small(self, request, preset, epsilon, C, exploring_controls):
        params = request.getfixturevalue(preset).with_constants(epsilon=epsilon, C=C)
        spec = ShootSpecFactory(locus=Locus.SOLITON if C < 0 else Locus.EINSTEIN)
        state = SeedingService.seed_unstable(params, spec)
        trajectory = IntegrationService.integrate(params, 'rescaled', state, exploring_controls)

        assert trajectory.termination is EventKind.HORIZON_REACHED
        assert trajectory.worst['conservation'] < 1e-8

    def test_halving_the_tolerance(self, hp1):
        state = SeedingService.seed_unstable(hp1, ShootSpecFactory())
        controls = IntegrationControlsFactory(s_max=20.0, rel_tol=1e-8, abs_tol=1e-10, detect_convergence=False)
        coarse = IntegrationService.integrate(hp1, 'rescaled', state, controls)
        fine = IntegrationService.integrate(hp1, 'rescaled', state, controls.tightened())
        difference = np.max(np.abs(coarse.final_state[:5] - fine.final_state[:5]))
        assert difference < 10 * controls.rel_tol

    def test_polynomial_system_agrees(self, hp1, exploring_controls):
        state = SeedingService.seed_unstable(hp1, ShootSpecFactory())
        rescaled = IntegrationService.integrate(hp1, 'rescaled', state, exploring_controls)
        polynomial = IntegrationService.integrate(hp1, 'polynomial', state, exploring_controls)
        np.testing.assert_allclose(polynomial.final_state[:5], rescaled.final_state[:5], atol=1e-8)
        assert polynomial.names[-1] == 'W'

    def test_kahler_flow_stays_kahler(self):
        bundle = CircleBundleParamsFactory()
        params = bundle.to_two_summands()
        x = 0.01
        state = KahlerService.kahler_seed(bundle, 1 - 2 * x, math.sqrt(x * (1 - x) / 2), 1e-3, 0.0)
        controls = IntegrationControlsFactory(s_max=30.0, detect_convergence=False)
        trajectory = IntegrationService.integrate(params, 'rescaled', state, controls)

        assert trajectory.termination is EventKind.HORIZON_REACHED
        for row in trajectory.y:
            first, second = KahlerService.kahler_residuals(bundle, PhaseState.from_vector(row), 0.0)
            assert abs(first) < 1e-8
            assert abs(second) < 1e-8

    @pytest.mark.parametrize('m', [1.0, 5.0, 50.0, math.inf])
    def test_multi_warped_conservation(self, m):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=3)
        multi = MultiWarpedParams.from_two_summands(params, m=m, lambda_virtual=0.0 if math.isinf(m) else 1 / m)
        delta = 1e-7
        tail = (delta,) if math.isinf(m) else (delta, delta)
        state = SeedingService.multi_seed(multi, tail, L=delta)
        assert abs(ResidualService.multi_conservation_residual(multi, state)) < 1e-13

        controls = IntegrationControlsFactory(s_max=30.0, detect_convergence=False)
        trajectory = IntegrationService.integrate(multi, 'multi', state, controls)
        assert trajectory.termination is EventKind.HORIZON_REACHED
        assert trajectory.worst['conservation'] < 1e-8
        assert trajectory.worst['constraint'] < 1e-8

    def test_quasi_lift_approaches_the_soliton(self, hp1):
        params = hp1.with_constants(C=-1.0)
        state = SeedingService.seed_unstable(params, ShootSpecFactory(soliton=True, delta=1e-3))
        controls = IntegrationControlsFactory(s_max=60.0, detect_convergence=False)
        soliton = IntegrationService.integrate(params, 'rescaled', state, controls)

        distances = []
        for m in (5.0, 50.0, 500.0):
            quasi = AlgebraService.lift_quasi(params, m, -params.C / m)
            lifted = SeedingService.quasi_seed(quasi, state)
            conservation, constraint = ResidualService.quasi_residuals(quasi, lifted)
            assert abs(conservation) < 1e-12
            assert abs(constraint) < 1e-14

            trajectory = IntegrationService.integrate(quasi, 'quasi', lifted, controls)
            assert trajectory.worst['conservation'] < 1e-8
            distances.append(
                max(
                    float(np.max(np.abs(np.interp(soliton.s, trajectory.s, trajectory.column(name)) - soliton.column(name))))
                    for name in ('X1', 'X2', 'Y1', 'Y2')
                )
            )

        assert distances[1] <= 2 * distances[0]
        assert distances[2] <= 2 * distances[1]
        assert distances[2] < distances[0]


class TestProfileSeeding:
    def test_round_sphere(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=3, positive_einstein=True)
        controls = IntegrationControlsFactory(s_max=1.0)
        trajectory = SeedingService.shoot_profile(params, 1.0, controls, stop_at_max_volume=False)

        for t, (f1, df1, f2, df2) in zip(trajectory.s, trajectory.y[:, :4]):
            assert f1 == pytest.approx(math.sin(t), abs=1e-8)
            assert f2 == pytest.approx(math.cos(t), abs=1e-8)

        max_volume = trajectory.first_event(EventKind.MAX_VOLUME_ORBIT)
        assert max_volume.s == pytest.approx(math.atan(math.sqrt(2 / 3)), abs=1e-8)

    def test_round_sphere_has_no_omega_critical_point(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=2, positive_einstein=True)
        trajectory = SeedingService.shoot_profile(params, 1.0, IntegrationControlsFactory(s_max=3.0))
        assert trajectory.termination is EventKind.MAX_VOLUME_ORBIT
        assert IntegrationService.count_omega_critical(trajectory) == 0

    def test_hat_system_crosses_the_maximal_volume_orbit(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=3, positive_einstein=True)
        t0 = 1e-3
        state = ProfileService.profile_to_hat(params, SeedingService.seed_profile(params, 1.0, t0=t0))
        controls = IntegrationControlsFactory(s_max=1.2)
        trajectory = IntegrationService.integrate(params, 'hat', state, controls, s0=t0)

        event = trajectory.first_event(EventKind.MAX_VOLUME_ORBIT)
        assert event.s == pytest.approx(math.atan(math.sqrt(2 / 3)), abs=1e-7)
        assert trajectory.final_s == pytest.approx(1.2)

    def test_cone_approach(self):
        """Small fbar profiles follow the cone (c1 sin t, c2 sin t)."""
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=2, positive_einstein=True)
        controls = IntegrationControlsFactory(s_max=1.0)
        trajectory = SeedingService.shoot_profile(params, 0.01, controls, stop_at_max_volume=False)

        c = math.sqrt(1 / 3)
        window = (trajectory.s >= 0.5) & (trajectory.s <= 1.0)
        assert window.any()
        for name in ('f1', 'f2'):
            deviation = np.abs(trajectory.column(name)[window] - c * np.sin(trajectory.s[window]))
            assert np.max(deviation) < 1e-2

    def test_self_check(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=3, positive_einstein=True)
        assert SeedingService.profile_self_check(params, 1.0, controls=IntegrationControlsFactory()) < 1e-8
        state = SeedingService.seed_profile(params, 1.0, check=True, controls=IntegrationControlsFactory())
        assert state.f1 == pytest.approx(1e-3, rel=1e-6)

    def test_self_check_rejects_coarse_t0(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=3, positive_einstein=True)
        with pytest.raises(SeedingError, match='halving'):
            SeedingService.seed_profile(params, 20.0, t0=0.15, check=True, controls=IntegrationControlsFactory())

    def test_shoot_profile_runs_the_self_check(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=3, positive_einstein=True)
        with pytest.raises(SeedingError):
            SeedingService.shoot_profile(params, 20.0, IntegrationControlsFactory(s_max=1.0), t0=0.15, check=True)

    def test_seed_rejects_large_t0(self, hp1):
        with pytest.raises(SeedingError):
            SeedingService.seed_profile(hp1, 1.0, t0=0.1)

    @pytest.mark.parametrize('fbar', [0.0, -1.0])
    def test_seed_rejects_nonpositive_fbar(self, hp1, fbar):
        with pytest.raises(ConfigurationError):
            SeedingService.seed_profile(hp1, fbar)

    def test_ricci_flat_mode_needs_vanishing_epsilon(self, hp1):
        with pytest.raises(ConfigurationError):
            SeedingService.seed_profile(hp1.with_constants(epsilon=-14.0), 1.0, mode='ricciflat')

    @pytest.mark.slow
    def test_spiral_gives_many_omega_critical_points(self):
        params = TwoSummandsParamsFactory(warped=True, d1=2, d2=2, positive_einstein=True)
        trajectory = SeedingService.shoot_profile(params, 0.002, IntegrationControlsFactory(s_max=3.0))
        assert IntegrationService.count_omega_critical(trajectory) >= 2
        for event in trajectory.events_of(EventKind.OMEGA_CRITICAL):
            assert event.slope != 0

    @pytest.mark.slow
    def test_node_gives_few_omega_critical_points(self):
        params = TwoSummandsParamsFactory(warped=True, d1=5, d2=5, positive_einstein=True)
        trajectory = SeedingService.shoot_profile(params, 0.02, IntegrationControlsFactory(s_max=3.0))
        assert IntegrationService.count_omega_critical(trajectory) <= 1
