"""Value types for finite metric measure spaces and their ray decompositions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from django.db import models
from scipy import sparse
from scipy.spatial.distance import cdist

from common.conf import needlecomp_setting
from common.exceptions import DegenerateInputError, EmptyClassError, SizeCapExceeded
from comparison_kernel.models import ExtendedReal
from needle_1d.models import MeanCurvatureValue, NeedleDensity

DENSE_CACHE_POINTS = 4096


class RayFlag(models.TextChoices):
    CROSSES_S = 'crosses_S', 'Crosses the boundary'
    INNER_ONLY = 'inner_only', 'Entirely inside Ω'
    OUTER_ONLY = 'outer_only', 'Entirely outside Ω'


class BoundaryCorrection(models.TextChoices):
    MIDPOINT = 'midpoint', 'Boundary placed halfway across the sampling gap'
    NONE = 'none', 'd_Ω − d_{Ω^c} on the sample points'


class BoundMode(models.TextChoices):
    CD = 'cd', 'Two-endpoint (CD) curvature estimate'
    MCP = 'mcp', 'One-endpoint (MCP) curvature estimate'


@dataclass(eq=False)
class DiscreteMMS:
    """
    A finite metric measure space.

    The metric is either a dense symmetric matrix or a row oracle mapping an
    index array to the corresponding block of rows; large samples use the
    oracle so the full matrix is never held in memory. ``attributes`` carries
    optional per-point arrays (cone coordinates, planar coordinates).
    """

    weights: np.ndarray
    metric: Optional[np.ndarray] = None
    row_oracle: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    labels: Optional[List[str]] = None
    attributes: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.weights.size == 0:
            raise DegenerateInputError('A metric measure space needs at least one point.')
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise DegenerateInputError('Weights must be finite and nonnegative.')
        if not self.weights.sum() > 0:
            raise DegenerateInputError('Total mass must be positive.')
        if self.metric is None and self.row_oracle is None:
            raise DegenerateInputError('Either a metric matrix or a row oracle is required.')
        if self.metric is not None:
            self.metric = np.asarray(self.metric, dtype=float)
            n = self.weights.size
            if self.metric.shape != (n, n):
                raise DegenerateInputError('Metric shape %(shape)s does not match %(n)s weights.',
                                           params={'shape': self.metric.shape, 'n': n})
            if not np.all(np.isfinite(self.metric)) or np.any(self.metric < 0):
                raise DegenerateInputError('Distances must be finite and nonnegative.')
            if np.any(np.diag(self.metric) != 0):
                raise DegenerateInputError('The metric must vanish on the diagonal.')
            scale = max(1.0, float(np.max(self.metric)))
            if np.max(np.abs(self.metric - self.metric.T)) > 1e-12 * scale:
                raise DegenerateInputError('The metric must be symmetric.')
        if self.labels is not None and len(self.labels) != self.weights.size:
            raise DegenerateInputError('Expected one label per point.')

    @classmethod
    def from_coordinates(cls, points, weights, *, labels=None, attributes=None) -> 'DiscreteMMS':
        """Euclidean distances between coordinate rows, computed with ``cdist``."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        extra = dict(attributes or {})
        extra.setdefault('coordinates', points)
        if points.shape[0] <= DENSE_CACHE_POINTS:
            return cls(weights=weights, metric=cdist(points, points), labels=labels, attributes=extra)
        return cls(weights=weights, row_oracle=lambda rows: cdist(points[rows], points),
                   labels=labels, attributes=extra)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def rows(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=int).reshape(-1)
        if self.metric is not None:
            return self.metric[indices]
        return np.asarray(self.row_oracle(indices), dtype=float)

    def distance(self, i: int, j: int) -> float:
        return float(self.rows([i])[0, j])

    def iter_row_blocks(self, indices=None, block_rows: Optional[int] = None):
        """Yield (row indices, distance block) pairs covering ``indices`` (all points by default)."""
        block_rows = needlecomp_setting('METRIC_BLOCK_ROWS') if block_rows is None else block_rows
        indices = np.arange(self.n) if indices is None else np.asarray(indices, dtype=int)
        for start in range(0, indices.size, block_rows):
            chunk = indices[start:start + block_rows]
            yield chunk, self.rows(chunk)

    def dense_metric(self, max_points: int = DENSE_CACHE_POINTS) -> np.ndarray:
        if self.metric is not None:
            return self.metric
        if self.n > max_points:
            raise SizeCapExceeded('Refusing to materialize a %(n)s×%(n)s metric.', params={'n': self.n})
        return self.rows(np.arange(self.n))

    def triangle_excess(self, samples: Optional[int] = None, seed: int = 0) -> float:
        """
        Largest relative violation d(i,j) − d(i,k) − d(k,j) over all triples, or
        over ``samples`` random triples when the space is large.
        """
        samples = needlecomp_setting('TRIANGLE_CHECK_SAMPLES') if samples is None else samples
        n = self.n
        if n ** 3 <= max(samples, 1) * 50 and n <= DENSE_CACHE_POINTS:
            metric = self.dense_metric()
            worst = 0.0
            for k in range(n):
                through = metric[:, k][:, None] + metric[k, :][None, :]
                excess = (metric - through) / np.maximum(1.0, metric)
                worst = max(worst, float(np.max(excess)))
            return worst
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, samples)
        j = rng.integers(0, n, samples)
        k = rng.integers(0, n, samples)
        rows_i = self.rows(i)
        rows_k = self.rows(k)
        d_ij = rows_i[np.arange(samples), j]
        d_ik = rows_i[np.arange(samples), k]
        d_kj = rows_k[np.arange(samples), j]
        return float(np.max((d_ij - d_ik - d_kj) / np.maximum(1.0, d_ij)))

    def validate(self, tol: float = 1e-9, samples: Optional[int] = None) -> 'DiscreteMMS':
        excess = self.triangle_excess(samples)
        if excess > tol:
            raise DegenerateInputError('Triangle inequality violated by %(excess)s (relative).',
                                       params={'excess': excess})
        return self

    def to_json(self):
        payload = {
            'n': self.n,
            'metric': self.dense_metric().reshape(-1),
            'weights': self.weights,
        }
        if self.labels is not None:
            payload['labels'] = list(self.labels)
        if self.attributes:
            payload['attributes'] = {key: np.asarray(value) for key, value in self.attributes.items()}
        return payload


@dataclass(frozen=True, eq=False)
class SubsetSpec:
    """Membership of each point in Ω."""

    inside: np.ndarray

    def __post_init__(self):
        inside = np.asarray(self.inside, dtype=bool).reshape(-1)
        if not inside.any():
            raise EmptyClassError('Ω has no sample points.')
        if inside.all():
            raise EmptyClassError('Ω^c has no sample points.')
        object.__setattr__(self, 'inside', inside)

    @classmethod
    def from_indices(cls, n: int, indices) -> 'SubsetSpec':
        inside = np.zeros(n, dtype=bool)
        inside[np.asarray(indices, dtype=int)] = True
        return cls(inside)

    @property
    def outside(self) -> np.ndarray:
        return ~self.inside

    def to_json(self):
        return {'inside': np.flatnonzero(self.inside)}


@dataclass(frozen=True, eq=False)
class SignedDistanceField:
    u: np.ndarray
    d_omega: np.ndarray
    d_complement: np.ndarray
    nearest_inside: np.ndarray
    nearest_outside: np.ndarray
    resolution: float
    boundary_correction: str
    lipschitz_excess: Optional[float] = None

    def inradius(self, omega: SubsetSpec) -> float:
        """max over Ω of the distance to the sampled complement."""
        return float(np.max(self.d_complement[omega.inside]))

    def placed_inradius(self, omega: SubsetSpec) -> float:
        """Depth of Ω below the corrected boundary, max over Ω of −u."""
        return float(np.max(-self.u[omega.inside]))

    def mesh_allowance(self, omega: SubsetSpec) -> float:
        """Gap between the sampled complement and the placed boundary at the deepest point."""
        return max(self.inradius(omega) - self.placed_inradius(omega), 0.0)


@dataclass(frozen=True, eq=False)
class TransportRelation:
    """Ordered pairs (i, j) with u(j) − u(i) = d(i, j), stored as a boolean CSR matrix."""

    pairs: sparse.csr_matrix
    u: np.ndarray
    tol: float
    lipschitz_excess: float

    @property
    def count(self) -> int:
        return int(self.pairs.nnz)

    def successors(self, i: int) -> np.ndarray:
        return self.pairs.indices[self.pairs.indptr[i]:self.pairs.indptr[i + 1]]

    def predecessors(self, i: int) -> np.ndarray:
        return self.pairs.getcol(i).nonzero()[0]

    def contains(self, i: int, j: int) -> bool:
        return bool(self.pairs[i, j])

    def as_set(self):
        rows, cols = self.pairs.nonzero()
        return set(zip(rows.tolist(), cols.tolist()))


@dataclass(frozen=True)
class BranchingSets:
    A_plus: np.ndarray
    A_minus: np.ndarray

    def to_json(self):
        return {'A_plus': self.A_plus, 'A_minus': self.A_minus}


@dataclass(frozen=True, eq=False)
class Ray:
    points: np.ndarray
    parameters: np.ndarray
    flag: str
    mass: float
    density: Optional[NeedleDensity] = None
    quotient_weight: float = 0.0
    surface_mass: float = 0.0
    bundled: bool = False
    fitted_curvature: Optional[float] = None

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def length(self) -> float:
        return float(self.parameters[-1] - self.parameters[0])

    def to_json(self):
        return {
            'points': self.points,
            'parameters': self.parameters,
            'flag': self.flag,
            'mass': self.mass,
            'density': self.density,
            'quotient_weight': self.quotient_weight,
            'surface_mass': self.surface_mass,
            'bundled': self.bundled,
            'fitted_curvature': self.fitted_curvature,
        }


@dataclass(frozen=True, eq=False)
class RayDecomposition:
    rays: List[Ray]
    assignment: np.ndarray
    total_mass: float
    unassigned_mass: float
    signed_distance: SignedDistanceField
    warnings: List[str] = field(default_factory=list)

    @property
    def quotient_weights(self) -> np.ndarray:
        return np.array([ray.quotient_weight for ray in self.rays])

    @property
    def densities(self) -> List[Optional[NeedleDensity]]:
        return [ray.density for ray in self.rays]

    @property
    def flags(self) -> List[str]:
        return [ray.flag for ray in self.rays]

    @property
    def surface_masses(self) -> np.ndarray:
        return np.array([ray.surface_mass for ray in self.rays])

    @property
    def unassigned_fraction(self) -> float:
        return self.unassigned_mass / self.total_mass if self.total_mass else 0.0

    @property
    def has_densities(self) -> bool:
        return bool(self.rays) and all(ray.density is not None for ray in self.rays)

    def to_json(self):
        return {
            'rays': self.rays,
            'assignment': self.assignment,
            'total_mass': self.total_mass,
            'unassigned_mass': self.unassigned_mass,
            'warnings': self.warnings,
        }


@dataclass(frozen=True)
class SurfaceMeasure:
    per_ray: np.ndarray
    total: float

    def to_json(self):
        return {'per_ray': self.per_ray, 'total': self.total}


@dataclass(frozen=True)
class CurvatureSample:
    ray: int
    value: MeanCurvatureValue
    surface_mass: float

    def to_json(self):
        return {'ray': self.ray, 'value': self.value, 'surface_mass': self.surface_mass}


@dataclass(frozen=True)
class InnerCurvatureMasses:
    B_in_mass: float
    B_out_mass: float

    def to_json(self):
        return {'B_in_mass': self.B_in_mass, 'B_out_mass': self.B_out_mass}


@dataclass(frozen=True)
class BoundReport:
    inradius: float
    H_lower: ExtendedReal
    r_comparison: ExtendedReal
    passed: bool
    margin: float
    tolerance: float
    quantile: float
    mode: str
    curvature_field: List[CurvatureSample] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    unassigned_fraction: float = 0.0
    H_overridden: bool = False
    mesh_allowance: float = 0.0
    headroom: float = math.inf

    def to_json(self):
        return {
            'inradius': self.inradius,
            'mesh_allowance': self.mesh_allowance,
            'headroom': self.headroom if math.isfinite(self.headroom) else ExtendedReal.of(self.headroom),
            'H_lower': self.H_lower,
            'r_comparison': self.r_comparison,
            'passed': self.passed,
            'margin': self.margin if math.isfinite(self.margin) else ExtendedReal.of(self.margin),
            'tolerance': self.tolerance,
            'quantile': self.quantile,
            'mode': self.mode,
            'curvature_field': self.curvature_field,
            'warnings': self.warnings,
            'unassigned_fraction': self.unassigned_fraction,
            'H_overridden': self.H_overridden,
        }
