"""
Management command gluing two profile trajectories into Einstein metrics on spheres.
"""

from apps.analysis.services import DEFAULT_GRID, SearchService
from apps.core.exceptions import ConfigurationError
from apps.lab.commands import LabCommand
from apps.lab.writers import write_jsonl


class Command(LabCommand):
    help = "Find (fbar, Fbar) where c_fbar meets the twisted d_Fbar on the maximal volume slice"
    extra_options = {
        'fbar_min': float,
        'fbar_max': float,
        'Fbar_min': float,
        'Fbar_max': float,
        'grid': int,
        'workers': int,
    }

    def add_command_arguments(self, parser):
        group = parser.add_argument_group('search')
        group.add_argument('--fbar-min', dest='fbar_min', type=float)
        group.add_argument('--fbar-max', dest='fbar_max', type=float)
        group.add_argument('--Fbar-min', dest='Fbar_min', type=float)
        group.add_argument('--Fbar-max', dest='Fbar_max', type=float)
        group.add_argument('--grid', type=int, help='Geometric grid size per parameter')
        group.add_argument('--workers', type=int)

    def run(self, config):
        if config.d1 is None or config.d2 is None:
            raise ConfigurationError("sphere matching needs --d1 and --d2")
        if config.preset is not None:
            raise ConfigurationError("sphere matching fixes its own normalization; drop --preset")

        first, _ = SearchService.sphere_params(config.d1, config.d2)
        fbar_range = (config.option('fbar_min', 0.3), config.option('fbar_max', 3.0))
        Fbar_range = (config.option('Fbar_min', fbar_range[0]), config.option('Fbar_max', fbar_range[1]))
        matches = SearchService.sphere_match(
            config.d1,
            config.d2,
            fbar_range,
            Fbar_range,
            n_grid=config.option('grid', DEFAULT_GRID),
            controls=config.controls(),
            workers=config.option('workers', 1),
        )

        header = self.header(config, first, fbar_range=list(fbar_range), Fbar_range=list(Fbar_range))
        write_jsonl(config.out, header, [match.as_dict() for match in matches], stream=self.stdout)
        if config.out:
            self.stdout.write(self.style.SUCCESS(f"✅ {len(matches)} matches written to {config.out}"))
