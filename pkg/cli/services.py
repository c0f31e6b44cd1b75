"""Report rendering and the input plumbing shared by the management commands."""

from __future__ import annotations

import csv
import hashlib
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Tuple

from common.exceptions import DomainError, InputParseError
from common.models import OutputFormat
from common.serializers import canonical_dumps, format_csv_float, to_jsonable
from discrete_needles.io import read_membership, read_space_csv, read_space_json
from discrete_needles.models import DiscreteMMS, SubsetSpec
from discrete_needles.services import ball_subset, level_subset

# Options every management command carries; they never reach a report.
FRAMEWORK_OPTIONS = frozenset({
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks',
    'format', 'report_out',
})


def command_arguments(options: Dict[str, Any]) -> Dict[str, Any]:
    return {key: value for key, value in sorted(options.items()) if key not in FRAMEWORK_OPTIONS}


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, 'rb') as handle:
            for chunk in iter(lambda: handle.read(1 << 16), b''):
                digest.update(chunk)
    except OSError as exc:
        raise InputParseError('Cannot read %(path)s: %(reason)s',
                              params={'path': str(path), 'reason': exc.strerror or exc}) from exc
    return digest.hexdigest()


def flatten(payload: Any, prefix: str = '') -> List[Tuple[str, Any]]:
    """Dotted key/value pairs of a JSON-ready payload."""
    if isinstance(payload, dict):
        items: Iterable = payload.items()
    elif isinstance(payload, list):
        items = enumerate(payload)
    else:
        return [(prefix, payload)]
    rows = []
    for key, value in items:
        rows.extend(flatten(value, f'{prefix}.{key}' if prefix else str(key)))
    return rows


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format_csv_float(value)
    return str(value)


def render_report(report, output_format: str = OutputFormat.JSON) -> str:
    payload = to_jsonable(report)
    if output_format == OutputFormat.JSON:
        return canonical_dumps(payload, indent=2)
    rows = flatten(payload)
    if output_format == OutputFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(('key', 'value'))
        writer.writerows((key, _cell(value)) for key, value in rows)
        return buffer.getvalue().rstrip('\n')
    if output_format == OutputFormat.TEXT:
        return '\n'.join(f'{key}: {_cell(value)}' for key, value in rows)
    raise DomainError('Unknown output format %(format)s.', params={'format': output_format})


def write_report(path, rendered: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rendered + '\n', encoding='utf-8')
    return path


def load_space(path, weights_path=None) -> Tuple[DiscreteMMS, Dict[str, str]]:
    """A space from a JSON file, or from a CSV distance matrix plus a weights file."""
    path = Path(path)
    if path.suffix.lower() == '.csv':
        if weights_path is None:
            raise InputParseError('A CSV distance matrix needs a weights file (--weights).')
        space = read_space_csv(path, weights_path)
        return space, {'space': file_sha256(path), 'weights': file_sha256(weights_path)}
    return read_space_json(path), {'space': file_sha256(path)}


def resolve_omega(space: DiscreteMMS, *, omega_path=None, omega_ball=None, omega_ulevel=None,
                  level_attribute: str = 't') -> Tuple[SubsetSpec, Dict[str, str]]:
    """Ω from a membership file, a ball about a sample point, or a sublevel of a point attribute."""
    if omega_path is not None:
        return read_membership(omega_path, space.n), {'omega': file_sha256(omega_path)}
    if omega_ball is not None:
        center, radius = omega_ball
        if not float(center).is_integer():
            raise DomainError('The ball centre must be a point index, got %(c)s.', params={'c': center})
        return ball_subset(space, int(center), float(radius)), {}
    if omega_ulevel is not None:
        return level_subset(space, float(omega_ulevel), level_attribute), {}
    raise DomainError('Ω must be given as a membership file, a ball or a level set.')

