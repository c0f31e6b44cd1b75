"""Interchange formats for metric measure spaces, membership and decompositions."""

from __future__ import annotations

import numpy as np

from common.exceptions import InputParseError, NeedleCompError
from common.serializers import decode_float, read_csv_rows, read_json, write_csv_rows, write_json
from discrete_needles.models import DiscreteMMS, RayDecomposition, SubsetSpec

MEMBERSHIP_HEADER = ('inside',)


def _floats(raw, what, path):
    try:
        values = np.array([decode_float(item) for item in raw], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputParseError('%(what)s in %(path)s must be numeric.',
                              params={'what': what, 'path': str(path)}) from exc
    if not np.all(np.isfinite(values)):
        raise InputParseError('%(what)s in %(path)s must be finite.', params={'what': what, 'path': str(path)})
    return values


def space_from_payload(payload, path='<payload>') -> DiscreteMMS:
    if not isinstance(payload, dict) or 'metric' not in payload or 'weights' not in payload:
        raise InputParseError('%(path)s needs "metric" and "weights".', params={'path': str(path)})
    weights = _floats(payload['weights'], 'weights', path)
    n = int(payload.get('n', weights.size))
    metric_raw = payload['metric']
    if not isinstance(metric_raw, list):
        raise InputParseError('"metric" in %(path)s must be an array.', params={'path': str(path)})
    if metric_raw and isinstance(metric_raw[0], list):
        metric_raw = [cell for row in metric_raw for cell in row]
    metric = _floats(metric_raw, 'metric', path)
    if weights.size != n or metric.size != n * n:
        raise InputParseError('%(path)s declares n=%(n)s but has %(w)s weights and %(m)s metric entries.',
                              params={'path': str(path), 'n': n, 'w': weights.size, 'm': metric.size})
    attributes = {key: np.asarray(value, dtype=float) for key, value in (payload.get('attributes') or {}).items()}
    try:
        space = DiscreteMMS(weights=weights, metric=metric.reshape(n, n), labels=payload.get('labels'),
                            attributes=attributes)
        return space.validate()
    except NeedleCompError as exc:
        raise InputParseError('%(path)s is not a metric measure space: %(reason)s',
                              params={'path': str(path), 'reason': str(exc)}) from exc


def read_space_json(path) -> DiscreteMMS:
    return space_from_payload(read_json(path), path)


def write_space_json(path, space: DiscreteMMS):
    return write_json(path, space)


def read_space_csv(matrix_path, weights_path) -> DiscreteMMS:
    """A headerless n×n distance matrix file plus a one-column weights file with header ``weight``."""
    try:
        with open(matrix_path, 'r', encoding='utf-8') as handle:
            rows = [line.strip() for line in handle if line.strip()]
    except OSError as exc:
        raise InputParseError('Cannot read %(path)s: %(reason)s',
                              params={'path': str(matrix_path), 'reason': exc.strerror or exc}) from exc
    metric = [_floats(row.split(','), 'metric row', matrix_path) for row in rows]
    weights = _floats([row[0] for row in read_csv_rows(weights_path, ('weight',))], 'weights', weights_path)
    if any(row.size != len(metric) for row in metric):
        raise InputParseError('%(path)s is not a square matrix.', params={'path': str(matrix_path)})
    return space_from_payload({'n': weights.size, 'metric': [cell for row in metric for cell in row],
                               'weights': weights.tolist()}, matrix_path)


def read_membership(path, n: int) -> SubsetSpec:
    """
    Membership of Ω: JSON ``{"inside": [indices]}`` or ``{"membership": [bools]}``,
    or a CSV with a single ``inside`` column of 0/1 flags.
    """
    if str(path).lower().endswith('.csv'):
        rows = read_csv_rows(path, MEMBERSHIP_HEADER)
        try:
            flags = [bool(int(row[0])) for row in rows]
        except (ValueError, IndexError) as exc:
            raise InputParseError('%(path)s must hold 0/1 flags.', params={'path': str(path)}) from exc
        payload = {'membership': flags}
    else:
        payload = read_json(path)
    try:
        if isinstance(payload, dict) and 'inside' in payload:
            indices = [int(index) for index in payload['inside']]
            if any(index < 0 or index >= n for index in indices):
                raise InputParseError('%(path)s lists indices outside 0..%(last)s.',
                                      params={'path': str(path), 'last': n - 1})
            return SubsetSpec.from_indices(n, indices)
        if isinstance(payload, dict) and 'membership' in payload:
            flags = np.asarray(payload['membership'], dtype=bool)
            if flags.size != n:
                raise InputParseError('%(path)s has %(m)s flags for %(n)s points.',
                                      params={'path': str(path), 'm': flags.size, 'n': n})
            return SubsetSpec(flags)
    except (TypeError, ValueError) as exc:
        raise InputParseError('%(path)s has malformed membership.', params={'path': str(path)}) from exc
    raise InputParseError('%(path)s needs "inside" or "membership".', params={'path': str(path)})


def write_membership(path, omega: SubsetSpec):
    return write_json(path, omega)


def write_decomposition_json(path, decomposition: RayDecomposition):
    return write_json(path, decomposition)


def write_decomposition_csv(path, decomposition: RayDecomposition):
    """One row per ray: id, flag, bundled (0/1), point count, mass, quotient weight, surface mass."""
    rows = [(position, ray.flag, int(ray.bundled), ray.size, ray.mass, ray.quotient_weight, ray.surface_mass)
            for position, ray in enumerate(decomposition.rays)]
    return write_csv_rows(path, ('ray', 'flag', 'bundled', 'points', 'mass', 'quotient_weight', 'surface_mass'),
                          rows)

