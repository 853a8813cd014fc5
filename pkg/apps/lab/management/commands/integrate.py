"""
Management command integrating one seeded trajectory and exporting it.
"""

import logging

from apps.core.exceptions import BlowUpError, DomainExitError
from apps.integrator.events import EventKind
from apps.lab.commands import SEED_OPTIONS, LabCommand, add_seed_arguments, prepare_run
from apps.lab.writers import write_events_json, write_trajectory_csv, write_trajectory_jsonl

logger = logging.getLogger(__name__)


class Command(LabCommand):
    help = "Integrate a seeded trajectory; writes CSV (or JSON lines) plus an events sidecar"
    extra_options = SEED_OPTIONS

    def add_command_arguments(self, parser):
        add_seed_arguments(parser)

    def run(self, config):
        params = config.resolve_params()
        run = prepare_run(config, params)
        if run.system in ('rescaled', 'polynomial') and params.epsilon < 0:
            message = "eps < 0 on the rescaled system: no trapping guarantees"
            logger.warning(f"⚠️ {message}")
            self.stdout.write(self.style.WARNING(f"⚠️ {message}"))

        controls = config.controls()
        trajectory = run.integrate(controls)
        header = self.header(config, run.params, system=run.system, controls=controls.as_dict())

        if config.out:
            if config.format == 'jsonl':
                write_trajectory_jsonl(config.out, run.params, trajectory, header)
            else:
                write_trajectory_csv(config.out, run.params, trajectory, header)
            write_events_json(config.out, trajectory, header)

        worst = ", ".join(f"{name}={value:.3e}" for name, value in trajectory.worst.items())
        self.stdout.write(
            f"{trajectory.termination.value} at s={trajectory.final_s:.10g} "
            f"after {len(trajectory)} samples, {len(trajectory.events)} events"
            + (f"; worst residuals {worst}" if worst else "")
        )

        if trajectory.termination is EventKind.BLOW_UP:
            raise BlowUpError("trajectory left the norm cap", s=trajectory.final_s)
        if trajectory.termination is EventKind.DOMAIN_EXIT:
            raise DomainExitError("trajectory left the domain of the vector field", s=trajectory.final_s)
        self.stdout.write(self.style.SUCCESS("✅ Integration finished"))
