"""
Management command printing the Hopf-fibration preset table.
"""

from apps.core.utils import display_rational
from apps.geometry.services import PresetService
from apps.lab.commands import LabCommand
from apps.lab.writers import write_jsonl


def _row(summary):
    params = summary.params
    return {
        'preset': summary.preset.name.label,
        'm': summary.preset.m,
        'd1': params.d1,
        'd2': params.d2,
        'norm_A_sq': summary.norm_a_sq,
        'ric_Q': summary.ric_q,
        'A1': params.A1,
        'A2': params.A2,
        'A3': params.A3,
        'd_hat': summary.d_hat,
        'cones': [
            {'branch': cone.branch.value, 'c1_sq': cone.c1**2, 'c2_sq': cone.c2**2}
            for cone in summary.cones
        ],
        'stability': summary.stability.kind.value if summary.stability else None,
        'notes': list(summary.notes),
    }


class Command(LabCommand):
    help = "Print every Hopf-fibration preset with its derived constants, cone solutions and stability"

    def run(self, config):
        m = 1 if config.m is None else config.m
        summaries = [PresetService.summarize(preset) for preset in PresetService.available(m)]

        if config.format == 'jsonl':
            write_jsonl(config.out, self.header(config), [_row(summary) for summary in summaries], stream=self.stdout)
            return

        self.stdout.write(f"Presets for m={m}:")
        for summary in summaries:
            params = summary.params
            cones = ", ".join(
                f"({display_rational(cone.c1**2)}, {display_rational(cone.c2**2)})" for cone in summary.cones
            ) or "-"
            line = (
                f"  {summary.preset.name.label:<4} d1={params.d1} d2={params.d2} "
                f"|A|^2={summary.norm_a_sq} Ric^Q={summary.ric_q} "
                f"A=({display_rational(params.A1)}, {display_rational(params.A2)}, {display_rational(params.A3)}) "
                f"D={display_rational(summary.d_hat)} cones(c1^2, c2^2)={cones} "
                f"stability={summary.stability.kind.value if summary.stability else '-'}"
            )
            if summary.notes:
                line += f" [{'; '.join(summary.notes)}]"
            self.stdout.write(line)
        self.stdout.write(self.style.SUCCESS(f"✅ {len(summaries)} presets"))
