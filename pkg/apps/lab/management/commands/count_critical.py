"""
Management command counting critical points of omega = f2/f1.
"""

from apps.analysis.services import ConeApproachService
from apps.core.exceptions import NotApplicableError
from apps.integrator.events import EventKind
from apps.integrator.services import IntegrationService, SeedingService
from apps.lab.commands import SEED_OPTIONS, LabCommand, add_seed_arguments, prepare_run
from apps.lab.writers import write_jsonl


class Command(LabCommand):
    help = "Count omega-critical points before the maximal volume orbit, or rotations around the cone point"
    extra_options = SEED_OPTIONS

    def add_command_arguments(self, parser):
        add_seed_arguments(parser)

    def run(self, config):
        params = config.resolve_params()
        record = {}

        if config.option('fbar') is not None or config.system == 'profile':
            fbar = config.option('fbar', 1.0)
            trajectory = SeedingService.shoot_profile(params, fbar, config.controls(), check=True)
            max_volume = trajectory.first_event(EventKind.MAX_VOLUME_ORBIT)
            record.update(
                fbar=fbar,
                count=IntegrationService.count_omega_critical(trajectory),
                t_max_volume=max_volume.s if max_volume else None,
            )
        else:
            run = prepare_run(config, params)
            trajectory = run.integrate(config.controls(detect_convergence=False))
            record['count'] = IntegrationService.count_omega_critical(trajectory)
            try:
                record['rotations'] = ConeApproachService.rotation_count(params, trajectory)
            except NotApplicableError:
                record['rotations'] = None
        record['termination'] = trajectory.termination.value

        if config.format == 'jsonl' or config.out:
            write_jsonl(config.out, self.header(config, params), [record], stream=self.stdout)
            return
        summary = ", ".join(f"{key}={value}" for key, value in record.items())
        self.stdout.write(self.style.SUCCESS(f"✅ {summary}"))
