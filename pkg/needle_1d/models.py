from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from django.db import models
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from common.exceptions import DegenerateInputError, DomainError
from comparison_kernel.models import ExtendedReal

MIN_SAMPLES = 4
ZERO_MATCH_TOL = 1e-12


class SigmaReading(models.TextChoices):
    """Which distortion coefficient the one-endpoint (MCP) inequality uses."""

    K_OVER_N_MINUS_ONE = 'k_over_n_minus_one', 'σ with κ = K/(N−1)'
    K_N = 'k_n', 'σ with κ = K/N'


class DerivativeEstimator(models.TextChoices):
    EXTRAPOLATED = 'extrapolated', 'Extrapolated one-sided quotient'
    LIMSUP = 'limsup', 'Largest one-sided quotient in the window'


def _locate(grid: np.ndarray, at: float) -> Optional[int]:
    hits = np.flatnonzero(np.abs(grid - at) <= ZERO_MATCH_TOL * max(1.0, abs(at)))
    return int(hits[0]) if hits.size else None


@dataclass(frozen=True, eq=False)
class NeedleDensity:
    """
    A nonnegative density sampled on a grid covering [a, b] with a ≤ 0 ≤ b.

    The grid is strictly increasing and contains 0; ``a`` and ``b`` are its
    end points.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if grid.shape != values.shape:
            raise DegenerateInputError('grid and values differ in length (%(g)s vs %(v)s).',
                                       params={'g': grid.size, 'v': values.size})
        if grid.size < MIN_SAMPLES:
            raise DegenerateInputError('A needle density needs at least %(n)s samples, got %(got)s.',
                                       params={'n': MIN_SAMPLES, 'got': grid.size})
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
            raise DegenerateInputError('Density samples must be finite.')
        if np.any(np.diff(grid) <= 0):
            raise DegenerateInputError('Density abscissae must be strictly increasing.')
        if np.any(values < 0):
            raise DegenerateInputError('Density values must be nonnegative.')
        if grid[0] > 0 or grid[-1] < 0:
            raise DegenerateInputError('The density interval [%(a)s, %(b)s] must contain 0.',
                                       params={'a': grid[0], 'b': grid[-1]})
        zero = _locate(grid, 0.0)
        if zero is None:
            raise DegenerateInputError('0 must be one of the density abscissae.')
        grid[zero] = 0.0
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, fn: Callable, a: float, b: float, samples: int = 201) -> 'NeedleDensity':
        grid = np.linspace(a, b, samples)
        nearest = int(np.argmin(np.abs(grid)))
        if abs(grid[nearest]) <= 1e-9 * (b - a):
            grid[nearest] = 0.0
        else:
            grid = np.union1d(grid, [0.0])
        return cls(grid, np.asarray(fn(grid), dtype=float))

    @property
    def a(self) -> float:
        return float(self.grid[0])

    @property
    def b(self) -> float:
        return float(self.grid[-1])

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def zero_index(self) -> int:
        return _locate(self.grid, 0.0)

    @property
    def value_at_zero(self) -> float:
        return float(self.values[self.zero_index])

    @property
    def step(self) -> float:
        return float(np.max(np.diff(self.grid)))

    def index_of(self, at: float) -> int:
        index = _locate(self.grid, at)
        if index is None:
            raise DomainError('%(at)s is not a grid abscissa.', params={'at': at})
        return index

    def powered(self, exponent: float) -> np.ndarray:
        return np.power(self.values, exponent)

    def value_at(self, r, exponent: float = 1.0):
        """Linear interpolation of h^p, raised back to 1/p."""
        interpolated = np.interp(r, self.grid, self.powered(exponent))
        return np.power(interpolated, 1.0 / exponent)

    def spline(self) -> CubicSpline:
        return CubicSpline(self.grid, self.values)

    def integral(self) -> float:
        return float(trapezoid(self.values, self.grid))

    def reflected(self) -> 'NeedleDensity':
        """h̃(r) = h(−r)."""
        return NeedleDensity(-self.grid[::-1], self.values[::-1])

    def dilated(self, factor: float) -> 'NeedleDensity':
        """Same samples on the interval stretched by ``factor`` about 0."""
        if factor <= 0:
            raise DomainError('Dilation factor must be positive.')
        return NeedleDensity(self.grid * factor, self.values)

    def restricted(self, lower: float, upper: float) -> 'NeedleDensity':
        keep = (self.grid >= lower - ZERO_MATCH_TOL) & (self.grid <= upper + ZERO_MATCH_TOL)
        return NeedleDensity(self.grid[keep], self.values[keep])

    def scaled(self, factor: float) -> 'NeedleDensity':
        return NeedleDensity(self.grid, self.values * factor)

    def to_json(self):
        return {'a': self.a, 'b': self.b, 'grid': self.grid, 'values': self.values}


@dataclass(frozen=True)
class ConcavityReport:
    """
    Outcome of a grid inequality check.

    ``worst_violation`` is the largest (right-hand side − left-hand side) seen;
    pointwise checks report their location as a degenerate triple.
    """

    passed: bool
    worst_violation: float
    worst_triple: Optional[Tuple[float, float, float]]
    tolerance: float
    checked: int = 0

    def to_json(self):
        return {
            'passed': self.passed,
            'worst_violation': self.worst_violation,
            'worst_triple': list(self.worst_triple) if self.worst_triple else None,
            'tolerance': self.tolerance,
            'checked': self.checked,
        }


@dataclass(frozen=True)
class MeanCurvatureValue:
    value: ExtendedReal

    def __float__(self):
        return float(self.value)

    def to_json(self):
        return self.value.to_json()


@dataclass(frozen=True)
class EnvelopeResult:
    """Below-tangent envelope of a CD density and the length bound it implies."""

    envelope: Callable = field(repr=False)
    max_b: Optional[ExtendedReal]
    length: float
    mean_curvature: ExtendedReal
    reversed: bool
    report: ConcavityReport

    @property
    def passed(self) -> bool:
        return self.report.passed

    def to_json(self):
        return {
            'max_b': self.max_b,
            'length': self.length,
            'mean_curvature': self.mean_curvature,
            'reversed': self.reversed,
            'report': self.report,
        }


@dataclass(frozen=True)
class MCPBoundResult:
    max_length: ExtendedReal
    length: float
    passed: bool
    margin: float
    hypotheses_hold: Optional[bool] = None

    def to_json(self):
        return {
            'max_length': self.max_length,
            'length': self.length,
            'passed': self.passed,
            'margin': self.margin,
            'hypotheses_hold': self.hypotheses_hold,
        }


@dataclass(frozen=True)
class BackwardMCBounds:
    """Upper (limsup) and lower (liminf) readings of the backward mean curvature."""

    limsup: ExtendedReal
    liminf: ExtendedReal

    def to_json(self):
        return {'limsup': self.limsup, 'liminf': self.liminf}
