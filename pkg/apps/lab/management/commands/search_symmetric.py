"""
Management command searching for symmetric Einstein profiles.
"""

from apps.analysis.services import DEFAULT_GRID, SearchService
from apps.lab.commands import LabCommand
from apps.lab.writers import write_jsonl


class Command(LabCommand):
    help = "Scan fbar for profiles with f1' = f2' = 0 at the maximal volume orbit (eps = -2n)"
    extra_options = {'fbar_min': float, 'fbar_max': float, 'grid': int, 'workers': int}

    def add_command_arguments(self, parser):
        group = parser.add_argument_group('search')
        group.add_argument('--fbar-min', dest='fbar_min', type=float, default=None)
        group.add_argument('--fbar-max', dest='fbar_max', type=float, default=None)
        group.add_argument('--grid', type=int, default=None, help='Geometric grid size')
        group.add_argument('--workers', type=int, default=None)

    def run(self, config):
        params = SearchService.normalized(config.resolve_params())
        fbar_range = (config.option('fbar_min', 0.01), config.option('fbar_max', 1.0))
        solutions = SearchService.symmetric_search(
            params,
            fbar_range,
            n_grid=config.option('grid', DEFAULT_GRID),
            controls=config.controls(),
            workers=config.option('workers', 1),
        )

        header = self.header(config, params, fbar_range=list(fbar_range))
        write_jsonl(config.out, header, [solution.as_dict() for solution in solutions], stream=self.stdout)

        if not config.out:
            return
        if solutions:
            self.stdout.write(self.style.SUCCESS(f"✅ {len(solutions)} symmetric profiles written to {config.out}"))
        else:
            self.stdout.write(self.style.WARNING("⚠️ No symmetric profile in range"))
