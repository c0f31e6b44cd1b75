"""CSV interchange for needle densities (header ``r,h``)."""

from __future__ import annotations

import math

from common.exceptions import InputParseError, NeedleCompError
from common.serializers import decode_float, read_csv_rows, write_csv_rows
from needle_1d.models import NeedleDensity

DENSITY_HEADER = ('r', 'h')


def read_density_csv(path) -> NeedleDensity:
    rows = read_csv_rows(path, DENSITY_HEADER)
    grid, values = [], []
    for line_number, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise InputParseError('Line %(line)s of %(path)s needs exactly two columns.',
                                  params={'line': line_number, 'path': str(path)})
        try:
            r, h = decode_float(row[0]), decode_float(row[1])
        except ValueError as exc:
            raise InputParseError('Line %(line)s of %(path)s is not numeric.',
                                  params={'line': line_number, 'path': str(path)}) from exc
        if not (math.isfinite(r) and math.isfinite(h)):
            raise InputParseError('Line %(line)s of %(path)s is not finite.',
                                  params={'line': line_number, 'path': str(path)})
        if h < 0:
            raise InputParseError('Negative density %(h)s on line %(line)s of %(path)s.',
                                  params={'h': h, 'line': line_number, 'path': str(path)})
        grid.append(r)
        values.append(h)
    try:
        return NeedleDensity(grid, values)
    except NeedleCompError as exc:
        raise InputParseError('%(path)s is not a valid density: %(reason)s',
                              params={'path': str(path), 'reason': str(exc)}) from exc


def write_density_csv(path, density: NeedleDensity):
    return write_csv_rows(path, DENSITY_HEADER, zip(density.grid.tolist(), density.values.tolist()))
