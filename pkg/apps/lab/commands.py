"""
Base class of the lab management commands.
"""

import logging
import math
from dataclasses import asdict, dataclass

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from apps.core.exceptions import ConfigurationError, LabError
from apps.dynamics.services import ProfileService
from apps.geometry.params import MultiWarpedParams
from apps.geometry.services import AlgebraService
from apps.integrator.services import IntegrationService, SeedingService
from apps.integrator.systems import SYSTEMS
from apps.lab.options import RunConfig, add_common_arguments

logger = logging.getLogger(__name__)

SEED_OPTIONS = {'fbar': float, 'virtual_m': float, 'lambda_virtual': float}


@dataclass(frozen=True)
class Run:
    """A system, its parameter set and the seeded initial state."""

    system: str
    params: object
    state: object
    s0: float = 0.0

    def integrate(self, controls, **kwargs):
        return IntegrationService.integrate(self.params, self.system, self.state, controls=controls, s0=self.s0, **kwargs)


def add_seed_arguments(parser):
    group = parser.add_argument_group('seeding')
    group.add_argument('--fbar', type=float, help='f2 at the singular orbit (hat and profile systems)')
    group.add_argument('--virtual-m', dest='virtual_m', type=float, help='Dimension of the virtual fiber')
    group.add_argument('--lambda-virtual', dest='lambda_virtual', type=float, help='Einstein constant of the virtual fiber')


def prepare_run(config, params, system=None):
    """
    Seed the requested system: unstable-manifold seeds for the rescaled
    family, singular-orbit Taylor data for hat and profile runs.
    """
    system = system or config.system or 'rescaled'
    if system not in SYSTEMS:
        raise ConfigurationError(f"unknown system {system!r}, expected one of {'|'.join(SYSTEMS)}")

    if system in ('hat', 'profile'):
        fbar = config.option('fbar', 1.0)
        t0 = settings.LAB_PROFILE_T0_FACTOR * fbar
        state = SeedingService.seed_profile(params, fbar, t0=t0, check=True, controls=config.controls())
        if system == 'hat':
            state = ProfileService.profile_to_hat(params, state)
        return Run(system, params, state, s0=t0)

    spec = config.shoot_spec()
    if system == 'multi':
        if params.C != 0:
            raise ConfigurationError("multi-warped runs have no C term", C=params.C)
        multi = MultiWarpedParams.from_two_summands(
            params,
            m=config.option('virtual_m', math.inf),
            lambda_virtual=config.option('lambda_virtual', 0.0),
        )
        _, b, l = spec.coefficients
        tail = (spec.delta * abs(b),) + ((spec.delta * l,) if multi.is_finite else ())
        return Run(system, multi, SeedingService.multi_seed(multi, tail, L=spec.delta * l))

    state = SeedingService.seed_unstable(params, spec)
    if system == 'quasi':
        quasi = AlgebraService.lift_quasi(
            params, config.option('virtual_m', math.inf), config.option('lambda_virtual', 0.0)
        )
        return Run(system, quasi, SeedingService.quasi_seed(quasi, state))
    return Run(system, params, state)


class LabCommand(BaseCommand):
    """
    Shared flags, --config merging and exit codes.

    Subclasses implement run(config). Lab errors leave as CommandError with
    the error's exit code as returncode.
    """

    # command-specific options readable from --config, name -> cast
    extra_options = {}

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def add_arguments(self, parser):
        add_common_arguments(parser)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            config = RunConfig.from_options(
                self.command_name,
                options,
                extra_casts=self.extra_options,
                report=lambda message: self.stdout.write(self.style.WARNING(f"⚠️ {message}")),
            )
            self.run(config)
        except ValidationError as exc:
            self.fail(ConfigurationError("; ".join(exc.messages)))
        except LabError as exc:
            self.fail(exc)

    def run(self, config):
        raise NotImplementedError

    def fail(self, error):
        logger.error(f"❌ {self.command_name}: {error}")
        self.stderr.write(self.style.ERROR(f"❌ {error}"))
        raise CommandError(str(error), returncode=error.exit_code) from error

    def header(self, config, params=None, **extra):
        values = {'version': settings.LAB_VERSION, 'command': self.command_name}
        values.update(config.as_header())
        if params is not None:
            values['params'] = asdict(params)
        values.update(extra)
        return values
