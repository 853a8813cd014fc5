"""
Management command checking the limits of a seeded trajectory.
"""

from django.core.management.base import CommandError

from apps.analysis.reports import Regime
from apps.analysis.services import AsymptoticsService, CompletenessService
from apps.lab.commands import SEED_OPTIONS, LabCommand, add_seed_arguments, prepare_run
from apps.lab.writers import write_jsonl


class Command(LabCommand):
    help = "Integrate a seeded trajectory and compare its trailing-window means with the regime's limits"
    extra_options = dict(SEED_OPTIONS, regime=str, tol=float, window=float)

    def add_command_arguments(self, parser):
        add_seed_arguments(parser)
        group = parser.add_argument_group('asymptotics')
        group.add_argument('--regime', choices=[regime.value for regime in Regime])
        group.add_argument('--tol', type=float, help='Tolerance on |observed - target|')
        group.add_argument('--window', type=float, help='Trailing window length in s')

    def run(self, config):
        params = config.resolve_params()
        run = prepare_run(config, params)
        trajectory = run.integrate(config.controls())

        report = AsymptoticsService.verify_asymptotics(
            run.params,
            trajectory,
            regime=config.option('regime'),
            tolerance=config.option('tol'),
            window=config.option('window'),
        )
        completeness = CompletenessService.completeness_diagnostic(run.params, trajectory)

        record = dict(report.as_dict(), completeness=completeness.as_dict())
        if config.format == 'jsonl' or config.out:
            write_jsonl(config.out, self.header(config, params), [record], stream=self.stdout)
        else:
            for name in report.targets:
                marker = "✅" if report.passed[name] else "❌"
                self.stdout.write(
                    f"  {marker} {name}: observed {report.observed[name]:.10g}, target {report.targets[name]:.10g}"
                )
            self.stdout.write(f"  completeness: {completeness.verdict.value} {completeness.reason}".rstrip())

        if not report.all_passed:
            raise CommandError(f"limits not reached: {', '.join(report.failures())}", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"✅ {report.regime.value} limits reached"))
