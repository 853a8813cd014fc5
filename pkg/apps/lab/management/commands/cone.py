"""
Management command reporting the cone solutions of a parameter set.
"""

from apps.core.exceptions import NotApplicableError
from apps.core.utils import display_rational
from apps.geometry.services import AlgebraService, ConeService
from apps.lab.commands import LabCommand
from apps.lab.writers import write_jsonl


class Command(LabCommand):
    help = "Cone solutions, their stationary points and stability, and the trapping roots"

    def run(self, config):
        params = config.resolve_params()
        cones = ConeService.cone_solutions(params)

        records = []
        for cone in cones:
            stability = ConeService.classify_cone_stability(params, cone)
            records.append(
                {
                    'branch': cone.branch.value,
                    'c1_sq': cone.c1**2,
                    'c2_sq': cone.c2**2,
                    'point': list(ConeService.cone_point(params, cone)),
                    'stability': stability.kind.value,
                    'discriminant': stability.discriminant,
                    'eigenvalues': [[complex(value).real, complex(value).imag] for value in stability.eigenvalues],
                }
            )

        try:
            roots = AlgebraService.omega_hat_roots(params)
        except NotApplicableError:
            roots = None

        if config.format == 'jsonl':
            header = self.header(config, params, d_hat=AlgebraService.d_hat(params), omega_hat_roots=roots)
            write_jsonl(config.out, header, records, stream=self.stdout)
            return

        self.stdout.write(f"D = {display_rational(AlgebraService.d_hat(params))}")
        if roots:
            self.stdout.write(f"omega-hat roots: {roots[0]:.12g}, {roots[1]:.12g}")
        if not records:
            self.stdout.write(self.style.WARNING("⚠️ No real cone solution"))
        for record in records:
            self.stdout.write(
                f"  {record['branch']:<6} c1^2={display_rational(record['c1_sq'])} "
                f"c2^2={display_rational(record['c2_sq'])} {record['stability']} "
                f"(discriminant {record['discriminant']:.6g})"
            )
