"""
Run configuration shared by the lab management commands.

Options come from command-line flags and, optionally, a dotenv-style
`--config` file of KEY=value lines. The file wins on conflict.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, fields

import environ
from dotenv import dotenv_values

from apps.core.exceptions import ConfigurationError
from apps.geometry.params import Preset, TwoSummandsParams
from apps.geometry.services import PresetService
from apps.integrator.controls import IntegrationControls, Locus, ShootSpec

logger = logging.getLogger(__name__)

DEFAULT_COEFFICIENTS = (0.0, 1.0, 1.0)
FORMATS = ('csv', 'jsonl')

# flag destination -> cast applied to values read from a config file
COMMON_OPTIONS = {
    'preset': str,
    'm': int,
    'd1': int,
    'd2': int,
    'A1': float,
    'A2': float,
    'A3': float,
    'eps': float,
    'C': float,
    'system': str,
    'locus': str,
    'delta': float,
    'coeffs': str,
    's_max': float,
    'rel_tol': float,
    'abs_tol': float,
    'out': str,
    'format': str,
}


def add_common_arguments(parser):
    """Flags every lab command accepts. Defaults are None so explicit values can be told apart."""
    group = parser.add_argument_group('parameters')
    group.add_argument('--preset', help='Hopf-fibration preset: cp, hp, f or cap')
    group.add_argument('--m', type=int, help='Family index of the preset')
    group.add_argument('--d1', type=int, help='Dimension of the collapsing sphere')
    group.add_argument('--d2', type=int, help='Dimension of the singular orbit')
    group.add_argument('--A1', type=float)
    group.add_argument('--A2', type=float)
    group.add_argument('--A3', type=float)
    group.add_argument('--eps', type=float, help='Soliton constant epsilon')
    group.add_argument('--C', type=float, help='Integrability constant C')

    group = parser.add_argument_group('integration')
    group.add_argument('--system', help='Vector field to integrate')
    group.add_argument('--locus', choices=[locus.value for locus in Locus])
    group.add_argument('--delta', type=float, help='Seed displacement')
    group.add_argument('--coeffs', help='Unstable-direction coefficients a,b,l')
    group.add_argument('--s-max', dest='s_max', type=float, help='Integration horizon')
    group.add_argument('--rel-tol', dest='rel_tol', type=float)
    group.add_argument('--abs-tol', dest='abs_tol', type=float)

    group = parser.add_argument_group('output')
    group.add_argument('--out', help='Output path')
    group.add_argument('--format', choices=FORMATS)
    group.add_argument('--config', help='KEY=value file; its values override flags')


def parse_coefficients(value):
    if value is None:
        return DEFAULT_COEFFICIENTS
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [item for item in str(value).replace(';', ',').split(',') if item.strip()]
    try:
        return tuple(float(item) for item in items)
    except ValueError:
        raise ConfigurationError("coefficients must be comma-separated numbers", coeffs=value)


def read_config_file(path, casts):
    """KEY=value pairs from a dotenv file, keys lower-cased and cast per option."""
    try:
        raw = dotenv_values(path)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}")
    if not raw:
        logger.warning(f"⚠️ Config file {path} is empty or missing")

    values = {}
    for key, value in raw.items():
        name = key.strip().lower().replace('-', '_')
        # parameter names keep their case on the command line
        name = {'a1': 'A1', 'a2': 'A2', 'a3': 'A3', 'c': 'C'}.get(name, name)
        if name not in casts:
            raise ConfigurationError(f"unknown config key {key!r}", path=path)
        if value is None or value == '':
            continue
        try:
            values[name] = environ.Env.parse_value(value, casts[name])
        except ValueError:
            raise ConfigurationError(f"config key {key!r} has an invalid value {value!r}", path=path)
    return values


def merge_options(options, casts, report=None):
    """
    Overlay the --config file on the flag values. Conflicts are logged and,
    when report is given, passed to it as a message.
    """
    merged = {name: options.get(name) for name in casts}
    path = options.get('config')
    if not path:
        return merged

    for name, value in read_config_file(path, casts).items():
        flag = merged.get(name)
        if flag is not None and flag != value:
            message = f"--{name.replace('_', '-')}={flag} overridden by {path}: {value}"
            logger.warning(f"⚠️ {message}")
            if report:
                report(message)
        merged[name] = value
    return merged


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of one command invocation."""

    command: str
    preset: str = None
    m: int = None
    d1: int = None
    d2: int = None
    A1: float = None
    A2: float = None
    A3: float = None
    eps: float = None
    C: float = None
    system: str = None
    locus: str = None
    delta: float = None
    coeffs: tuple = DEFAULT_COEFFICIENTS
    s_max: float = None
    rel_tol: float = None
    abs_tol: float = None
    out: str = None
    format: str = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_options(cls, command, options, extra_casts=None, report=None):
        casts = dict(COMMON_OPTIONS)
        casts.update(extra_casts or {})
        merged = merge_options(options, casts, report=report)

        known = {f.name for f in fields(cls)} - {'command', 'extra'}
        values = {name: merged[name] for name in known if name in merged}
        values['coeffs'] = parse_coefficients(merged.get('coeffs'))
        extra = {name: merged[name] for name in merged if name not in known}
        config = cls(command=command, extra=extra, **values)
        if config.format is not None and config.format not in FORMATS:
            raise ConfigurationError(f"unknown format {config.format!r}")
        return config

    @property
    def epsilon(self):
        return 0.0 if self.eps is None else float(self.eps)

    @property
    def constant(self):
        return 0.0 if self.C is None else float(self.C)

    def option(self, name, default=None):
        value = self.extra.get(name)
        return default if value is None else value

    def resolve_params(self):
        """Preset or explicit (d1, d2, A1, A2, A3); exactly one source."""
        explicit = [self.d1, self.d2, self.A1, self.A2]
        if self.preset is not None:
            if any(value is not None for value in explicit + [self.A3]):
                raise ConfigurationError("give either --preset or explicit d1, d2, A1, A2, A3, not both")
            preset = Preset(self.preset, 1 if self.m is None else self.m)
            return PresetService.resolve(preset, epsilon=self.epsilon, C=self.constant)
        if any(value is None for value in explicit):
            raise ConfigurationError("parameters need --preset or all of --d1 --d2 --A1 --A2")
        return TwoSummandsParams(
            d1=self.d1,
            d2=self.d2,
            A1=self.A1,
            A2=self.A2,
            A3=0.0 if self.A3 is None else self.A3,
            epsilon=self.epsilon,
            C=self.constant,
        )

    def controls(self, **overrides):
        return IntegrationControls.from_settings(
            s_max=self.s_max, rel_tol=self.rel_tol, abs_tol=self.abs_tol, **overrides
        )

    def shoot_spec(self):
        locus = self.locus
        if locus is None:
            locus = Locus.SOLITON if self.constant < 0 else Locus.EINSTEIN
        return ShootSpec(coefficients=self.coeffs, delta=self.delta, locus=locus)

    def as_header(self):
        """Resolved values for output headers; unset options are left out."""
        values = {
            key: value
            for key, value in asdict(self).items()
            if value is not None and key not in ('extra', 'out', 'format')
        }
        values.update({key: value for key, value in self.extra.items() if value is not None})
        values['coeffs'] = list(self.coeffs)
        for key, value in values.items():
            if isinstance(value, float) and math.isinf(value):
                values[key] = 'inf'
        return values
