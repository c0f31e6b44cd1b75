"""Model spaces: distances, radial densities, truncated samples and sharpness witnesses."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from scipy.integrate import quad

from common.conf import needlecomp_setting
from common.exceptions import (
    DegenerateInputError,
    DomainError,
    ParameterMismatchError,
    SizeCapExceeded,
    UnsupportedParameterError,
)
from comparison_kernel.models import ComparisonTriple
from comparison_kernel.services import inradius_comparison_r, sin_kappa
from discrete_needles.models import DENSE_CACHE_POINTS, DiscreteMMS, SubsetSpec
from discrete_needles.services import level_subset
from model_spaces.models import BuiltinBase, ConePoint, ModelKind, ModelSpace, SharpnessWitness

logger = logging.getLogger('model_spaces')


def circle_base(points: int = 64, diameter: float = math.pi) -> DiscreteMMS:
    """Equally spaced points on a circle of the given intrinsic diameter, arc-length measure."""
    if points < 1:
        raise DegenerateInputError('A base needs at least one point.')
    diameter = min(float(diameter), math.pi)
    angles = 2 * math.pi * np.arange(points) / points
    gap = np.abs(angles[:, None] - angles[None, :])
    metric = diameter * np.minimum(gap, 2 * math.pi - gap) / math.pi
    return DiscreteMMS(weights=np.full(points, 2 * diameter / points), metric=metric,
                       attributes={'angle': angles})


def sphere_base(points: int = 64) -> DiscreteMMS:
    """Fibonacci lattice on the unit sphere with geodesic distance and area measure."""
    if points < 1:
        raise DegenerateInputError('A base needs at least one point.')
    index = np.arange(points) + 0.5
    z = 1 - 2 * index / points
    azimuth = math.pi * (1 + math.sqrt(5)) * index
    rho = np.sqrt(1 - z ** 2)
    xyz = np.column_stack([rho * np.cos(azimuth), rho * np.sin(azimuth), z])
    metric = np.arccos(np.clip(xyz @ xyz.T, -1.0, 1.0))
    np.fill_diagonal(metric, 0.0)
    metric = 0.5 * (metric + metric.T)
    return DiscreteMMS(weights=np.full(points, 4 * math.pi / points), metric=metric,
                       attributes={'coordinates': xyz})


def point_base() -> DiscreteMMS:
    return DiscreteMMS(weights=np.ones(1), metric=np.zeros((1, 1)))


def builtin_base(name: str, points: int = 64) -> DiscreteMMS:
    if name == BuiltinBase.CIRCLE:
        return circle_base(points)
    if name == BuiltinBase.SPHERE:
        return sphere_base(points)
    if name == BuiltinBase.POINT:
        return point_base()
    raise UnsupportedParameterError('Unknown builtin base %(name)s.', params={'name': name})


def cone_distances(kind: str, t, s, theta):
    """
    Vectorized cone/suspension distance between (t, ·) and (s, ·) at base angle theta.

    The half-angle forms avoid the cancellation of the textbook cosine laws
    for nearby points.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    half = np.sin(np.minimum(np.asarray(theta, dtype=float), math.pi) / 2) ** 2
    if kind == ModelKind.EUCLIDEAN_CONE:
        return np.sqrt((t - s) ** 2 + 4 * t * s * half)
    if kind == ModelKind.HYPERBOLIC_CONE:
        inner = np.sinh((t - s) / 2) ** 2 + np.sinh(t) * np.sinh(s) * half
        return 2 * np.arcsinh(np.sqrt(inner))
    if kind == ModelKind.SPHERICAL_SUSPENSION:
        inner = np.sin((t - s) / 2) ** 2 + np.sin(t) * np.sin(s) * half
        return 2 * np.arcsin(np.sqrt(np.clip(inner, 0.0, 1.0)))
    raise DomainError('Unknown model kind %(kind)s.', params={'kind': kind})


def _check_radius(space: ModelSpace, t: float):
    if not t >= 0 or (space.radial_max.is_finite and t > float(space.radial_max)):
        raise DomainError('Radial coordinate %(t)s is outside the model space.', params={'t': t})


def cone_distance(space: ModelSpace, p: ConePoint, q: ConePoint) -> float:
    _check_radius(space, p.t)
    _check_radius(space, q.t)
    theta = 0.0 if p.is_tip or q.is_tip else space.base.distance(p.x, q.x)
    return float(cone_distances(space.kind, p.t, q.t, theta))


def radial_density(space: ModelSpace, t):
    """t^N, sinh^N t or sin^N t; the 0^0 case is 1."""
    radii = np.asarray(t, dtype=float)
    if np.any(radii < 0):
        raise DomainError('Radial density is defined for t ≥ 0.')
    if space.kind == ModelKind.EUCLIDEAN_CONE:
        base = radii
    elif space.kind == ModelKind.HYPERBOLIC_CONE:
        base = np.sinh(radii)
    else:
        if np.any(radii > math.pi):
            raise DomainError('Suspension radial density is defined on [0, π].')
        base = np.clip(np.sin(radii), 0.0, None)
    values = np.power(base, space.N_exp)
    return float(values) if np.ndim(t) == 0 else values


def signed_distance_in_truncated_cone(p: ConePoint, R: float) -> float:
    """Distance from p to the boundary of the truncation {t ≤ R}."""
    if not 0 <= p.t <= R:
        raise DomainError('Point with t=%(t)s is not in the truncation of radius %(R)s.',
                          params={'t': p.t, 'R': R})
    return R - p.t


def _exterior_layers(space: ModelSpace, radial_steps: int, step: float, exterior_steps: Optional[int]) -> int:
    layers = max(4, radial_steps // 8) if exterior_steps is None else int(exterior_steps)
    if space.radial_max.is_finite:
        # layers must stay strictly below the far tip of the suspension
        limit = int(math.ceil(float(space.radial_max) / step - 0.5)) - radial_steps
        layers = min(layers, max(limit, 0))
    return max(layers, 0)


def truncated_cone_sample(space: ModelSpace, R: float, radial_steps: int,
                          exterior_steps: Optional[int] = None,
                          size_cap: Optional[int] = None) -> DiscreteMMS:
    """
    Sample of {t ≤ R} plus a few exterior layers.

    Radial layers sit at the cell midpoints (i + ½)·R/steps and carry weight
    radial_density·Δt·w_base. Point 0 is the tip with weight 0. The exterior
    layers continue the same spacing past R so the truncation has a
    complement; ``attributes['t']`` and ``attributes['x']`` hold the cone
    coordinates of every point.
    """
    R = float(R)
    if not R > 0 or (space.radial_max.is_finite and R > float(space.radial_max)):
        raise DomainError('Truncation radius %(R)s is outside (0, %(max)s].',
                          params={'R': R, 'max': float(space.radial_max)})
    if radial_steps < 4:
        raise DegenerateInputError('At least 4 radial steps are required.')
    step = R / radial_steps
    layers = radial_steps + _exterior_layers(space, radial_steps, step, exterior_steps)
    base = space.base
    n = 1 + layers * base.n
    size_cap = needlecomp_setting('SAMPLE_SIZE_CAP') if size_cap is None else size_cap
    if n > size_cap:
        raise SizeCapExceeded('A sample of %(n)s points exceeds the cap of %(cap)s.',
                              params={'n': n, 'cap': size_cap})

    radii = (np.arange(layers) + 0.5) * step
    t = np.concatenate([[0.0], np.repeat(radii, base.n)])
    x = np.concatenate([[0], np.tile(np.arange(base.n), layers)])
    weights = radial_density(space, t) * step * base.weights[x]
    weights[0] = 0.0
    base_metric = np.minimum(base.dense_metric(), math.pi)
    kind = space.kind

    def rows(indices):
        theta = base_metric[np.ix_(x[indices], x)]
        return cone_distances(kind, t[indices][:, None], t[None, :], theta)

    logger.debug('truncated %s sample: R=%s steps=%s layers=%s points=%s', kind, R, radial_steps, layers, n)
    attributes = {'t': t, 'x': x}
    if n <= DENSE_CACHE_POINTS:
        metric = rows(np.arange(n))
        np.fill_diagonal(metric, 0.0)
        metric = 0.5 * (metric + metric.T)
        return DiscreteMMS(weights=weights, metric=metric, attributes=attributes)
    return DiscreteMMS(weights=weights, row_oracle=rows, attributes=attributes)


def polar_disk_sample(angles: int = 40, radial_steps: int = 40, radius: float = 1.0,
                      exterior_steps: int = 10) -> DiscreteMMS:
    """
    Planar polar lattice: ``angles`` rays at radii (k + ½)·radius/steps with
    Lebesgue cell weights r·Δr·Δθ. There is no centre point.
    """
    if angles < 1 or radial_steps < 4:
        raise DegenerateInputError('The polar lattice needs at least one angle and 4 radial steps.')
    step = radius / radial_steps
    radii = (np.arange(radial_steps + exterior_steps) + 0.5) * step
    phi = 2 * math.pi * np.arange(angles) / angles
    r = np.repeat(radii, angles)
    theta = np.tile(phi, radii.size)
    coordinates = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    weights = r * step * (2 * math.pi / angles)
    return DiscreteMMS.from_coordinates(coordinates, weights, attributes={'t': r, 'angle': theta})


def truncation_subset(sample: DiscreteMMS, R: float) -> SubsetSpec:
    """Ω = {t ≤ R} for a sample carrying a radial attribute."""
    return level_subset(sample, R * (1 + 1e-12), attribute='t')


def model_curvature(space: ModelSpace) -> float:
    """The K for which the space is the equality model: 0, −N_exp or N_exp."""
    if space.kind == ModelKind.EUCLIDEAN_CONE:
        return 0.0
    if space.kind == ModelKind.HYPERBOLIC_CONE:
        return -space.N_exp
    return space.N_exp


def _tip_ball_mass(space: ModelSpace, radius: float, radial_steps: int) -> float:
    """m(B_radius(o)) read off a truncated sample through its distances to the tip."""
    # only the tip row is evaluated, so the sample is never materialized as a matrix
    sample = truncated_cone_sample(space, radius, radial_steps, size_cap=math.inf)
    distances = sample.rows([0])[0]
    return float(sample.weights[distances <= radius * (1 + 1e-9)].sum())


def volume_cone_check(space: ModelSpace, K: float, N: float, r: float, R: float,
                      tol: float = 1e-6, radial_steps: Optional[int] = None) -> bool:
    """
    Compare m(B_R(o))/m(B_r(o)) about the tip, measured on sampled models
    through their cone distances, with the ratio of ∫ sin_κ^{N−1} for
    κ = K/(N−1); the two agree when (K, N) matches the model kind.
    """
    if not N > 1:
        raise DomainError('N must exceed 1, got %(N)s.', params={'N': N})
    if not (math.isclose(N, space.N_exp + 1, rel_tol=1e-12)
            and math.isclose(K, model_curvature(space), rel_tol=1e-12, abs_tol=1e-12)):
        raise ParameterMismatchError('(K, N) = (%(K)s, %(N)s) does not describe a %(kind)s with exponent %(exp)s.',
                                     params={'K': K, 'N': N, 'kind': space.kind, 'exp': space.N_exp})
    if not 0 < r <= R or (space.radial_max.is_finite and R > float(space.radial_max)):
        raise DomainError('Radii must satisfy 0 < r ≤ R within the model space.')
    radial_steps = needlecomp_setting('VOLUME_SAMPLE_STEPS') if radial_steps is None else radial_steps
    model_ratio = _tip_ball_mass(space, R, radial_steps) / _tip_ball_mass(space, r, radial_steps)

    kappa = K / (N - 1)

    def profile(u):
        return max(sin_kappa(kappa, u), 0.0) ** (N - 1)

    outer, _ = quad(profile, 0.0, R, limit=200)
    inner, _ = quad(profile, 0.0, r, limit=200)
    formula_ratio = outer / inner
    passed = abs(model_ratio - formula_ratio) <= tol * max(1.0, abs(formula_ratio))
    logger.debug('volume cone check %s: sampled %.12g formula %.12g', space.kind, model_ratio, formula_ratio)
    return bool(passed)


def _witness_kind(K: float, N: float) -> ModelKind:
    if math.isclose(K, N - 1, rel_tol=1e-12):
        return ModelKind.SPHERICAL_SUSPENSION
    if K == 0:
        return ModelKind.EUCLIDEAN_CONE
    if math.isclose(K, -(N - 1), rel_tol=1e-12):
        return ModelKind.HYPERBOLIC_CONE
    raise UnsupportedParameterError('Sharpness witnesses exist for K ∈ {N−1, 0, −(N−1)}, got K=%(K)s.',
                                    params={'K': K})


def sharpness_witness(K: float, chi: float, N: float, base: Optional[DiscreteMMS] = None) -> SharpnessWitness:
    """
    The truncation of radius r_{K,H,N} in the model space of (K, N), with H = chi·(N−1).

    K = N−1 gives the suspension, K = 0 the Euclidean cone and K = −(N−1) the
    hyperbolic cone. chi is the mean curvature per dimension of the boundary
    sphere: chi = 1 on the Euclidean cone gives the unit ball.
    """
    if not N > 1:
        raise DomainError('N must exceed 1, got %(N)s.', params={'N': N})
    kind = _witness_kind(K, N)
    H = float(chi) * (N - 1)
    radius = inradius_comparison_r(ComparisonTriple(K, H, N))
    if not radius.is_finite:
        raise DegenerateInputError('The ball condition fails for (K, H, N) = (%(K)s, %(H)s, %(N)s).',
                                   params={'K': K, 'H': H, 'N': N})
    if base is None:
        base = circle_base(64) if N - 1 <= 1.5 else sphere_base(64)
    space = ModelSpace(kind=kind, N_exp=N - 1, base=base)
    return SharpnessWitness(space=space, K=K, H=H, N=N, R=float(radius))
