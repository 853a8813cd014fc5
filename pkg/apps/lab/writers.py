"""
Bit-stable writers for trajectories, events and search results.
"""

import csv
import json
import logging
import math
from pathlib import Path

import numpy as np
from django.conf import settings

from apps.core.exceptions import OutputError
from apps.core.utils import format_float, shortest_float
from apps.dynamics.services import ResidualService
from apps.dynamics.states import PhaseState

logger = logging.getLogger(__name__)

RESCALED_COLUMNS = (
    's', 'X1', 'X2', 'Y1', 'Y2', 'L', 't', 'u',
    'cons_residual', 'S1', 'S2', 'K', 'F0', 'G', 'omega',
)
RESIDUAL_COLUMNS = {'conservation': 'cons_residual'}


def _jsonable(value):
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (float, np.floating)):
        return shortest_float(value)
    if isinstance(value, np.integer):
        return int(value)
    if hasattr(value, 'value') and isinstance(value.value, str):
        return value.value
    return value


def dumps(value):
    return json.dumps(_jsonable(value), sort_keys=True, allow_nan=False)


def _open(path):
    try:
        target = Path(path)
        if target.parent and not target.parent.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
        return target.open('w', encoding='utf-8', newline='')
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}", path=str(path))


def header_lines(header):
    """`# key=value` lines; version first, the rest sorted."""
    values = dict(header)
    lines = [f"# version={values.pop('version', settings.LAB_VERSION)}"]
    for key in sorted(values):
        value = values[key]
        if isinstance(value, (dict, list, tuple)):
            value = dumps(value)
        elif isinstance(value, float):
            value = format_float(value)
        lines.append(f"# {key}={value}")
    return lines


def trajectory_table(params, trajectory):
    """Column names and rows for a trajectory; rescaled runs carry the functionals."""
    if trajectory.system in ('rescaled', 'polynomial'):
        residuals = trajectory.residuals
        rows = []
        for index, row in enumerate(trajectory.y):
            state = PhaseState.from_vector(row)
            if state.Y1 > 0:
                values = ResidualService.functionals(params, state)
                functionals = (values.K, values.F0, values.G, state.omega)
            else:
                functionals = (math.nan,) * 4
            rows.append(
                (trajectory.s[index],)
                + tuple(row[:7])
                + tuple(
                    residuals.get(name, [math.nan] * len(trajectory))[index]
                    for name in ('conservation', 'S1', 'S2')
                )
                + functionals
            )
        return RESCALED_COLUMNS, rows

    names = sorted(trajectory.residuals)
    columns = ('s',) + tuple(trajectory.names) + tuple(RESIDUAL_COLUMNS.get(name, name) for name in names)
    rows = [
        (trajectory.s[index],)
        + tuple(row)
        + tuple(trajectory.residuals[name][index] for name in names)
        for index, row in enumerate(trajectory.y)
    ]
    return columns, rows


def write_trajectory_csv(path, params, trajectory, header):
    columns, rows = trajectory_table(params, trajectory)
    handle = _open(path)
    try:
        with handle:
            for line in header_lines(header):
                handle.write(line + '\n')
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_float(value) for value in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}", path=str(path))
    logger.info(f"✅ Wrote {len(rows)} samples to {path}")
    return Path(path)


def events_path(path):
    return Path(f"{path}.events.json")


def write_events_json(path, trajectory, header):
    target = events_path(path)
    document = {
        'version': header.get('version', settings.LAB_VERSION),
        'params': header,
        'termination': trajectory.termination.value,
        'events': [event.to_dict(trajectory.names) for event in trajectory.events],
    }
    handle = _open(target)
    try:
        with handle:
            handle.write(dumps(document) + '\n')
    except OSError as exc:
        raise OutputError(f"cannot write {target}: {exc}", path=str(target))
    return target


def write_trajectory_jsonl(path, params, trajectory, header):
    columns, rows = trajectory_table(params, trajectory)
    records = [dict(zip(columns, row)) for row in rows]
    return write_jsonl(path, header, records)


def write_jsonl(path, header, records, stream=None):
    """Header object first, then one object per record. Writes to stream when path is None."""
    lines = [dumps({'header': header})] + [dumps(record) for record in records]
    if path is None:
        for line in lines:
            stream.write(line)
        return None

    handle = _open(path)
    try:
        with handle:
            for line in lines:
                handle.write(line + '\n')
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}", path=str(path))
    logger.info(f"✅ Wrote {len(records)} records to {path}")
    return Path(path)
