"""Canonical JSON/CSV encoding for reports, samples and decompositions."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from common.exceptions import InputParseError

POSITIVE_INFINITY = '+inf'
NEGATIVE_INFINITY = '-inf'


def encode_float(value: float):
    """Finite floats pass through (``repr`` round-trips exactly); infinities become strings."""
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return POSITIVE_INFINITY if value > 0 else NEGATIVE_INFINITY
    return value


def decode_float(raw) -> float:
    if isinstance(raw, str):
        lowered = raw.strip().lower()
        if lowered in (POSITIVE_INFINITY, 'inf', 'infinity', '+infinity'):
            return math.inf
        if lowered in (NEGATIVE_INFINITY, '-infinity'):
            return -math.inf
    return float(raw)


def to_jsonable(obj: Any):
    """Convert numpy containers, extended reals and dataclass reports to plain JSON values."""
    if hasattr(obj, 'to_json'):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(key): to_jsonable(obj[key]) for key in sorted(obj.keys(), key=str)}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(item) for item in items]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(item) for item in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return encode_float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    return str(obj)


def canonical_dumps(obj: Any, *, indent=None) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=indent, allow_nan=False,
                      separators=(',', ':') if indent is None else (',', ': '))


def inputs_digest(obj: Any) -> str:
    """sha256 over the canonical encoding; identical inputs give identical digests."""
    return hashlib.sha256(canonical_dumps(obj).encode('utf-8')).hexdigest()


def read_json(path) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except OSError as exc:
        raise InputParseError('Cannot read %(path)s: %(reason)s',
                              params={'path': str(path), 'reason': exc.strerror or exc}) from exc
    except json.JSONDecodeError as exc:
        raise InputParseError('Malformed JSON in %(path)s: %(reason)s',
                              params={'path': str(path), 'reason': exc.msg}) from exc


def write_json(path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_dumps(obj, indent=2) + '\n', encoding='utf-8')
    return path


def format_csv_float(value: float) -> str:
    encoded = encode_float(value)
    return encoded if isinstance(encoded, str) else format(encoded, '.17g')


def read_csv_rows(path, expected_header: Sequence[str]) -> list[list[str]]:
    """Return the data rows of a CSV file whose header must equal ``expected_header``."""
    try:
        with open(path, 'r', encoding='utf-8', newline='') as handle:
            rows = [row for row in csv.reader(handle) if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise InputParseError('Cannot read %(path)s: %(reason)s',
                              params={'path': str(path), 'reason': exc.strerror or exc}) from exc
    if not rows:
        raise InputParseError('%(path)s is empty', params={'path': str(path)})
    header = [cell.strip() for cell in rows[0]]
    if header != list(expected_header):
        raise InputParseError(
            'Unexpected header %(header)s in %(path)s; expected %(expected)s',
            params={'header': ','.join(header), 'path': str(path), 'expected': ','.join(expected_header)},
        )
    return rows[1:]


def write_csv_rows(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_csv_float(cell) if isinstance(cell, (float, np.floating)) else cell
                             for cell in row])
    return path
