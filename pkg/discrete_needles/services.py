"""Signed distances, transport rays and the inradius bound on finite metric measure spaces."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import List, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from common.conf import needlecomp_setting
from common.exceptions import (
    DegenerateDecompositionWarning,
    DegenerateInputError,
    DomainError,
    EmptyRayError,
    PreconditionViolation,
    UnsupportedParameterError,
)
from comparison_kernel.models import ExtendedReal
from comparison_kernel.services import first_positive_zero
from discrete_needles.models import (
    BoundaryCorrection,
    BoundMode,
    BoundReport,
    BranchingSets,
    CurvatureSample,
    DiscreteMMS,
    InnerCurvatureMasses,
    Ray,
    RayDecomposition,
    RayFlag,
    SignedDistanceField,
    SubsetSpec,
    SurfaceMeasure,
    TransportRelation,
)
from needle_1d.models import DerivativeEstimator, MeanCurvatureValue, NeedleDensity
from needle_1d.services import (
    backward_mc_bounds,
    inner_mean_curvature_from_density,
    mean_curvature_from_boundary_mass,
)

logger = logging.getLogger('discrete_needles')

ZERO_SNAP = 1e-12


def _check_subset(space: DiscreteMMS, omega: SubsetSpec):
    if omega.inside.size != space.n:
        raise DegenerateInputError('Membership has %(m)s entries for %(n)s points.',
                                   params={'m': omega.inside.size, 'n': space.n})


def signed_distance(space: DiscreteMMS, omega: SubsetSpec, boundary_correction: Optional[str] = None,
                    verify_lipschitz: bool = True) -> SignedDistanceField:
    """
    u = d_Ω − d_{Ω^c} on the sample.

    With the midpoint correction the boundary is placed halfway across the
    gap between each point's nearest opposite-class point and that point's
    own nearest opposite-class point, so u is negative on Ω, positive on
    Ω^c, and transport pairs can cross the boundary.
    """
    _check_subset(space, omega)
    correction = boundary_correction or needlecomp_setting('BOUNDARY_CORRECTION')
    if correction not in BoundaryCorrection.values:
        raise UnsupportedParameterError('Unknown boundary correction %(c)s.', params={'c': correction})

    n = space.n
    inside = np.flatnonzero(omega.inside)
    outside = np.flatnonzero(omega.outside)
    d_omega = np.empty(n)
    d_complement = np.empty(n)
    nearest_inside = np.empty(n, dtype=int)
    nearest_outside = np.empty(n, dtype=int)
    nearest_neighbour = np.empty(n)
    for rows, block in space.iter_row_blocks():
        span = np.arange(rows.size)
        to_inside = block[:, inside]
        k = np.argmin(to_inside, axis=1)
        d_omega[rows] = to_inside[span, k]
        nearest_inside[rows] = inside[k]
        to_outside = block[:, outside]
        k = np.argmin(to_outside, axis=1)
        d_complement[rows] = to_outside[span, k]
        nearest_outside[rows] = outside[k]
        nearest_neighbour[rows] = np.where(block > 0, block, np.inf).min(axis=1)

    finite = nearest_neighbour[np.isfinite(nearest_neighbour)]
    resolution = float(np.median(finite)) if finite.size else 0.0

    if correction == BoundaryCorrection.MIDPOINT:
        u = np.empty(n)
        u[inside] = -(d_complement[inside] - 0.5 * d_omega[nearest_outside[inside]])
        u[outside] = d_omega[outside] - 0.5 * d_complement[nearest_inside[outside]]
    else:
        u = d_omega - d_complement

    excess = lipschitz_excess(space, u) if verify_lipschitz else None
    if excess is not None and excess > needlecomp_setting('TRANSPORT_TOL'):
        logger.warning('signed distance is not 1-Lipschitz on the sample (excess %.3g)', excess)
    return SignedDistanceField(u=u, d_omega=d_omega, d_complement=d_complement,
                               nearest_inside=nearest_inside, nearest_outside=nearest_outside,
                               resolution=resolution, boundary_correction=correction,
                               lipschitz_excess=excess)


def lipschitz_excess(space: DiscreteMMS, u: np.ndarray) -> float:
    """max over pairs of |u(x) − u(y)| − d(x, y)."""
    worst = -math.inf
    for rows, block in space.iter_row_blocks():
        worst = max(worst, float(np.max(u[None, :] - u[rows, None] - block)))
    return worst


def inradius(space: DiscreteMMS, omega: SubsetSpec, boundary_correction: Optional[str] = None) -> float:
    return signed_distance(space, omega, boundary_correction, verify_lipschitz=False).inradius(omega)


def transport_ordering(space: DiscreteMMS, u, tol: Optional[float] = None) -> TransportRelation:
    """All ordered pairs (x, y), x ≠ y, with u(y) − u(x) = d(x, y) up to tol·max(1, d)."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != space.n:
        raise DegenerateInputError('u has %(m)s values for %(n)s points.', params={'m': u.size, 'n': space.n})
    tol = needlecomp_setting('TRANSPORT_TOL') if tol is None else tol
    sources, targets = [], []
    worst = -math.inf
    for rows, block in space.iter_row_blocks():
        diff = u[None, :] - u[rows, None] - block
        worst = max(worst, float(diff.max()))
        hit = (np.abs(diff) <= tol * np.maximum(1.0, block)) & (block > 0)
        r, c = np.nonzero(hit)
        sources.append(rows[r])
        targets.append(c)
    sources = np.concatenate(sources) if sources else np.empty(0, dtype=int)
    targets = np.concatenate(targets) if targets else np.empty(0, dtype=int)
    pairs = sparse.csr_matrix((np.ones(sources.size, dtype=bool), (sources, targets)),
                              shape=(space.n, space.n))
    pairs.sort_indices()
    logger.debug('transport relation: %s pairs over %s points', pairs.nnz, space.n)
    return TransportRelation(pairs=pairs, u=u, tol=tol, lipschitz_excess=worst)


def _pair_keys(pairs: sparse.csr_matrix) -> np.ndarray:
    rows, cols = pairs.nonzero()
    return np.sort(rows.astype(np.int64) * pairs.shape[0] + cols)


def _contains(keys: np.ndarray, query: np.ndarray) -> np.ndarray:
    if keys.size == 0:
        return np.zeros(query.size, dtype=bool)
    slot = np.minimum(np.searchsorted(keys, query), keys.size - 1)
    return keys[slot] == query


def _branching(adjacency: sparse.csr_matrix, u: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Points whose neighbours under ``adjacency`` are not totally ordered by the relation."""
    n = adjacency.shape[0]
    owner = np.repeat(np.arange(n), np.diff(adjacency.indptr))
    neighbours = adjacency.indices
    order = np.lexsort((u[neighbours], owner))
    owner, neighbours = owner[order], neighbours[order]
    same = owner[1:] == owner[:-1]
    z = neighbours[:-1][same].astype(np.int64)
    w = neighbours[1:][same].astype(np.int64)
    related = _contains(keys, z * n + w) | _contains(keys, w * n + z)
    flagged = np.zeros(n, dtype=bool)
    flagged[owner[:-1][same][~related]] = True
    return flagged


def branching_points(space: DiscreteMMS, relation: TransportRelation) -> BranchingSets:
    """
    A₊: points with two successors not related to each other; A₋ likewise for
    predecessors. Neighbours are sorted by u and only consecutive ones are
    tested, which is exhaustive when the relation is transitive.
    """
    keys = _pair_keys(relation.pairs)
    forward = relation.pairs.tocsr()
    backward = relation.pairs.T.tocsr()
    forward.sort_indices()
    backward.sort_indices()
    A_plus = np.flatnonzero(_branching(forward, relation.u, keys))
    A_minus = np.flatnonzero(_branching(backward, relation.u, keys))
    return BranchingSets(A_plus=A_plus, A_minus=A_minus)


def _greedy_chains(block: sparse.csr_matrix, members: np.ndarray, u: np.ndarray,
                   min_chain_points: int) -> List[np.ndarray]:
    """Repeatedly remove a longest path of related points; ties go to the smallest point id."""
    size = members.size
    order = np.argsort(u, kind='stable')
    incoming = block.T.tocsr()
    remaining = np.ones(size, dtype=bool)
    chains = []
    while remaining.sum() >= min_chain_points:
        length = np.zeros(size, dtype=int)
        parent = np.full(size, -1)
        for node in order:
            if not remaining[node]:
                continue
            preds = incoming.indices[incoming.indptr[node]:incoming.indptr[node + 1]]
            preds = preds[remaining[preds]]
            if preds.size:
                best = length[preds].max()
                tied = preds[length[preds] == best]
                parent[node] = tied[np.argmin(members[tied])]
                length[node] = best + 1
            else:
                length[node] = 1
        longest = length.max()
        if longest < min_chain_points:
            break
        ends = np.flatnonzero(length == longest)
        node = ends[np.argmin(members[ends])]
        path = []
        while node >= 0:
            path.append(node)
            node = parent[node]
        path = np.array(path[::-1])
        chains.append(members[path])
        remaining[path] = False
    return chains


def extract_chains(relation: TransportRelation, candidates: np.ndarray,
                   min_chain_points: Optional[int] = None) -> List[np.ndarray]:
    """
    Maximal chains of the relation restricted to ``candidates``.

    Weak components that are already totally ordered are returned whole; any
    other component is split greedily into longest chains. Each chain is
    returned sorted by u.
    """
    min_chain_points = needlecomp_setting('MIN_CHAIN_POINTS') if min_chain_points is None else min_chain_points
    index = np.flatnonzero(candidates)
    if index.size == 0:
        return []
    restricted = relation.pairs[index][:, index].tocsr()
    u = relation.u[index]
    count, labels = connected_components(restricted, directed=True, connection='weak')
    grouping = np.argsort(labels, kind='stable')
    starts = np.searchsorted(labels[grouping], np.arange(count + 1))
    chains = []
    for component in range(count):
        members = grouping[starts[component]:starts[component + 1]]
        size = members.size
        if size < min_chain_points:
            continue
        block = restricted[members][:, members]
        if block.nnz == size * (size - 1) // 2:
            chains.append(index[members[np.argsort(u[members], kind='stable')]])
        else:
            for chain in _greedy_chains(block.tocsr(), index[members], u[members], min_chain_points):
                chains.append(chain)
    return chains


def _build_ray(space: DiscreteMMS, omega: SubsetSpec, u: np.ndarray, chain: np.ndarray) -> Ray:
    """Rays are parameterized by u itself, shifted so the crossing of S (or the end nearest it) is 0."""
    values = u[chain]
    inside = omega.inside[chain]
    if inside.all():
        flag, parameters = RayFlag.INNER_ONLY, values - values[-1]
    elif not inside.any():
        flag, parameters = RayFlag.OUTER_ONLY, values - values[0]
    else:
        flag, parameters = RayFlag.CROSSES_S, values.copy()
    return Ray(points=np.asarray(chain, dtype=int), parameters=parameters, flag=flag,
               mass=float(space.weights[chain].sum()))


def _bundle(space: DiscreteMMS, omega: SubsetSpec, field: SignedDistanceField, members: np.ndarray,
            bundle_points: int, min_chain_points: int) -> List[np.ndarray]:
    """
    Group points by the sampled boundary point they reach first: an inside
    point's nearest outside point, an outside point's nearest inside point's
    nearest outside point. Those feet are clustered by farthest-point
    sampling, starting from the smallest point id, into about
    members/bundle_points groups. Each group is returned sorted by u.
    """
    feet = np.where(omega.inside[members], field.nearest_outside[members],
                    field.nearest_outside[field.nearest_inside[members]])
    distinct = np.unique(feet)
    count = min(max(1, int(round(members.size / bundle_points))), distinct.size)
    between = np.concatenate([block[:, distinct] for _, block in space.iter_row_blocks(distinct)])
    centres = [0]
    reach = between[0].copy()
    while len(centres) < count:
        centres.append(int(np.argmax(reach)))
        reach = np.minimum(reach, between[centres[-1]])
    labels = np.argmin(between[:, centres], axis=1)[np.searchsorted(distinct, feet)]
    groups = []
    for label in range(count):
        group = members[labels == label]
        if group.size >= min_chain_points:
            groups.append(group[np.argsort(field.u[group], kind='stable')])
    return groups


def ray_decomposition(space: DiscreteMMS, omega: SubsetSpec, tol: Optional[float] = None,
                      boundary_correction: Optional[str] = None,
                      min_chain_points: Optional[int] = None,
                      max_unassigned_fraction: Optional[float] = None,
                      bundle_points: Optional[int] = None) -> RayDecomposition:
    """
    Exact transport chains, then bundles for whatever they leave behind.

    When the chains miss more than ``max_unassigned_fraction`` of the mass,
    as on any generic point cloud, the remaining points are grouped by
    boundary foot into bundles of about ``bundle_points`` points; each
    becomes a ray marked ``bundled``. ``bundle_points=0`` keeps the exact
    chains only.
    """
    _check_subset(space, omega)
    tol = needlecomp_setting('TRANSPORT_TOL') if tol is None else tol
    min_chain_points = needlecomp_setting('MIN_CHAIN_POINTS') if min_chain_points is None else min_chain_points
    max_unassigned_fraction = (needlecomp_setting('MAX_UNASSIGNED_FRACTION')
                               if max_unassigned_fraction is None else max_unassigned_fraction)
    bundle_points = needlecomp_setting('BUNDLE_POINTS') if bundle_points is None else bundle_points

    field = signed_distance(space, omega, boundary_correction, verify_lipschitz=False)
    relation = transport_ordering(space, field.u, tol)
    field = replace(field, lipschitz_excess=relation.lipschitz_excess)
    if relation.lipschitz_excess > tol:
        logger.warning('signed distance is not 1-Lipschitz on the sample (excess %.3g)',
                       relation.lipschitz_excess)

    branching = branching_points(space, relation)
    candidates = space.weights > 0
    candidates[branching.A_plus] = False
    candidates[branching.A_minus] = False
    chains = extract_chains(relation, candidates, min_chain_points)
    chains.sort(key=lambda chain: (-chain.size, int(chain.min())))
    rays = [_build_ray(space, omega, field.u, chain) for chain in chains]

    assignment = np.full(space.n, -1)
    for position, ray in enumerate(rays):
        assignment[ray.points] = position
    total = space.total_mass
    leftover = np.flatnonzero((assignment < 0) & (space.weights > 0))
    if bundle_points and space.weights[leftover].sum() > max_unassigned_fraction * total:
        for group in _bundle(space, omega, field, leftover, bundle_points, min_chain_points):
            assignment[group] = len(rays)
            rays.append(replace(_build_ray(space, omega, field.u, group), bundled=True))
    unassigned = float(space.weights[assignment < 0].sum())

    notes = []
    if unassigned > max_unassigned_fraction * total:
        message = ('%.1f%% of the mass lies outside every ray (threshold %.1f%%)'
                   % (100 * unassigned / total, 100 * max_unassigned_fraction))
        notes.append(message)
        warnings.warn(message, DegenerateDecompositionWarning)
        logger.warning(message)
    logger.info('ray decomposition: %s rays (%s bundled), %s branching points, unassigned fraction %.3g',
                len(rays), len(rays) - len(chains), branching.A_plus.size + branching.A_minus.size,
                unassigned / total)
    return RayDecomposition(rays=rays, assignment=assignment, total_mass=total, unassigned_mass=unassigned,
                            signed_distance=field, warnings=notes)


def _voronoi_cells(parameters: np.ndarray) -> np.ndarray:
    gaps = np.diff(parameters)
    cells = np.empty(parameters.size)
    cells[0], cells[-1] = gaps[0], gaps[-1]
    cells[1:-1] = 0.5 * (gaps[:-1] + gaps[1:])
    return cells


def _box_smooth(masses: np.ndarray, cells: np.ndarray, half: int) -> np.ndarray:
    """Mass over length in symmetric index windows, shrunk near the ends."""
    size = masses.size
    position = np.arange(size)
    reach = np.minimum(half, np.minimum(position, size - 1 - position))
    cumulative_mass = np.concatenate([[0.0], np.cumsum(masses)])
    cumulative_length = np.concatenate([[0.0], np.cumsum(cells)])
    lo, hi = position - reach, position + reach + 1
    return (cumulative_mass[hi] - cumulative_mass[lo]) / (cumulative_length[hi] - cumulative_length[lo])


def _insert_zero(parameters: np.ndarray, values: np.ndarray):
    nearest = int(np.argmin(np.abs(parameters)))
    if abs(parameters[nearest]) <= ZERO_SNAP:
        parameters = parameters.copy()
        parameters[nearest] = 0.0
        return parameters, values
    slot = int(np.searchsorted(parameters, 0.0))
    bracket = [max(slot - 1, 0), min(slot, parameters.size - 1)]
    if np.all(values[bracket] > 0):
        # log-linear chord: never above a log-concave density
        at_zero = float(np.exp(np.interp(0.0, parameters[bracket], np.log(values[bracket]))))
    else:
        at_zero = float(np.interp(0.0, parameters, values))
    return np.insert(parameters, slot, 0.0), np.insert(values, slot, max(at_zero, 0.0))


def _touches_boundary(ray: Ray, u: np.ndarray, resolution: float) -> bool:
    end = ray.points[-1] if ray.flag == RayFlag.INNER_ONLY else ray.points[0]
    return abs(u[end]) <= 2 * resolution


def _fit_bundle(ray: Ray, weights: np.ndarray):
    """(boundary density, curvature) from the cumulative mass of a bundle's points at or before 0."""
    before = ray.parameters <= 0
    try:
        boundary_density, curvature = mean_curvature_from_boundary_mass(-ray.parameters[before],
                                                                        weights[ray.points][before])
    except DegenerateInputError:
        logger.debug('bundle of %s points is too shallow for a curvature fit', ray.size)
        return None, None
    return boundary_density, float(curvature)


def _ray_density(ray: Ray, weights: np.ndarray, bin_width: Optional[float], u: np.ndarray,
                 resolution: float) -> Ray:
    # bundles can repeat a parameter; tied samples share one cell
    parameters, slot = np.unique(ray.parameters, return_inverse=True)
    if parameters.size < 2:
        raise EmptyRayError('A ray with %(n)s distinct point cannot carry a density.', params={'n': parameters.size})
    masses = np.bincount(slot, weights=weights[ray.points], minlength=parameters.size)
    cells = _voronoi_cells(parameters)
    width = ray.length / math.sqrt(parameters.size) if bin_width is None else bin_width
    half = int(round(width / (2 * float(np.median(np.diff(parameters)))))) if width > 0 else 0
    values = _box_smooth(masses, cells, half)
    grid, values = _insert_zero(parameters, values)
    if grid.size < 4:
        raise EmptyRayError('A ray needs at least 4 samples around the boundary, got %(n)s.',
                            params={'n': grid.size})
    density = NeedleDensity(grid, values)
    integral = density.integral()
    quotient_weight = ray.mass / integral if integral > 0 else 0.0
    on_surface = ray.flag == RayFlag.CROSSES_S or _touches_boundary(ray, u, resolution)
    surface = quotient_weight * density.value_at_zero if on_surface else 0.0
    fitted = None
    if ray.bundled and ray.flag != RayFlag.OUTER_ONLY:
        boundary_density, fitted = _fit_bundle(ray, weights)
        if fitted is not None and on_surface:
            surface = boundary_density
    return replace(ray, density=density, quotient_weight=float(quotient_weight), surface_mass=float(surface),
                   fitted_curvature=fitted)


def conditional_densities(space: DiscreteMMS, decomposition: RayDecomposition,
                          bin_width: Optional[float] = None,
                          threads: Optional[int] = None) -> RayDecomposition:
    """
    Per-ray densities from one-dimensional Voronoi cells, box-smoothed over
    ``bin_width`` (ray length / √points by default), with quotient weights
    normalized so that Σ q_α ∫ h_α equals the assigned mass.
    """
    if not decomposition.rays:
        return decomposition
    threads = needlecomp_setting('THREADS') if threads is None else threads
    field = decomposition.signed_distance

    def build(ray):
        return _ray_density(ray, space.weights, bin_width, field.u, field.resolution)

    if threads and threads > 1 and len(decomposition.rays) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rays = list(pool.map(build, decomposition.rays))
    else:
        rays = [build(ray) for ray in decomposition.rays]
    return replace(decomposition, rays=rays)


def _require_densities(decomposition: RayDecomposition):
    if decomposition.rays and not decomposition.has_densities:
        raise PreconditionViolation('Estimate the conditional densities before using them.')


def surface_measure(decomposition: RayDecomposition) -> SurfaceMeasure:
    """m_S as Σ q_α h_α(0) over rays meeting the boundary."""
    _require_densities(decomposition)
    per_ray = decomposition.surface_masses
    return SurfaceMeasure(per_ray=per_ray, total=float(per_ray.sum()))


def inner_mean_curvature_field(decomposition: RayDecomposition,
                               estimator: str = DerivativeEstimator.EXTRAPOLATED,
                               order: Optional[int] = None) -> List[CurvatureSample]:
    """
    Left log-derivative of each boundary ray's density at 0, weighted by its
    surface mass. Bundles report their fitted curvature instead. Outer-only
    rays that start on S read +∞.
    """
    _require_densities(decomposition)
    samples = []
    for position, ray in enumerate(decomposition.rays):
        if ray.flag != RayFlag.CROSSES_S and ray.surface_mass == 0:
            continue
        if ray.flag == RayFlag.OUTER_ONLY:
            value = MeanCurvatureValue(ExtendedReal.infinity())
        elif ray.fitted_curvature is not None:
            value = MeanCurvatureValue(ExtendedReal(ray.fitted_curvature))
        else:
            value = inner_mean_curvature_from_density(ray.density, estimator=estimator, order=order)
        samples.append(CurvatureSample(ray=position, value=value, surface_mass=ray.surface_mass))
    return samples


def finite_inner_curvature_check(decomposition: RayDecomposition) -> InnerCurvatureMasses:
    inner = sum(ray.mass for ray in decomposition.rays if ray.flag == RayFlag.INNER_ONLY)
    outer = sum(ray.mass for ray in decomposition.rays if ray.flag == RayFlag.OUTER_ONLY)
    return InnerCurvatureMasses(B_in_mass=float(inner), B_out_mass=float(outer))


def exterior_ball_check(space: DiscreteMMS, omega: SubsetSpec, delta: float,
                        field: Optional[SignedDistanceField] = None, tol: float = 1e-9) -> bool:
    """
    Every inside point within two sample spacings of Ω^c must see an outside
    point p with d(x, p) ≥ δ whose ball of radius d(x, p) misses Ω, up to the
    offset d_{Ω^c}(x) between x and the sampled boundary.
    """
    if not delta > 0:
        raise DomainError('The exterior ball radius must be positive.')
    field = field or signed_distance(space, omega, verify_lipschitz=False)
    inside = np.flatnonzero(omega.inside)
    boundary = inside[field.d_complement[inside] <= 2 * field.resolution]
    outside = np.flatnonzero(omega.outside)
    clearance = field.d_omega[outside]
    failures = 0
    for rows, block in space.iter_row_blocks(boundary):
        reach = block[:, outside]
        slack = field.d_complement[rows][:, None]
        ok = (reach >= delta) & (clearance[None, :] >= reach - slack - tol)
        failures += int(np.count_nonzero(~ok.any(axis=1)))
    if failures:
        logger.info('exterior ball condition at radius %s fails at %s of %s boundary points',
                    delta, failures, boundary.size)
    return failures == 0


def weighted_quantile(values: Sequence[float], weights: Sequence[float], quantile: float) -> float:
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.size == 0:
        raise DegenerateInputError('No values to take a quantile of.')
    if not 0 <= quantile <= 1:
        raise DomainError('Quantile must lie in [0, 1].')
    order = np.argsort(values, kind='stable')
    cumulative = np.cumsum(weights[order])
    if not cumulative[-1] > 0:
        return float(np.quantile(values, quantile, method='inverted_cdf'))
    slot = int(np.searchsorted(cumulative / cumulative[-1], quantile, side='left'))
    return float(values[order][min(slot, values.size - 1)])


def verify_inradius_bound(space: DiscreteMMS, omega: SubsetSpec, K: float, N: float,
                          quantile: Optional[float] = None, tol: Optional[float] = None,
                          mode: str = BoundMode.CD, H_override: Optional[float] = None,
                          transport_tol: Optional[float] = None, boundary_correction: Optional[str] = None,
                          bin_width: Optional[float] = None, threads: Optional[int] = None,
                          decomposition: Optional[RayDecomposition] = None,
                          bundle_points: Optional[int] = None) -> BoundReport:
    """
    Estimate H_lower as the m_S-weighted ``quantile`` of the inner mean
    curvature and check inradius(Ω) ≤ r_{K,H_lower,N} + tol + allowance.

    inradius is the raw max over Ω of the distance to the sampled
    complement. The allowance is the mesh gap between that complement and
    the corrected boundary used to parameterize the rays, so a model sampled
    at spacing Δ gets Δ/2 and the check tightens as the sample refines.
    ``headroom`` is r + allowance − inradius.
    """
    if not N > 1:
        raise DomainError('N must exceed 1, got %(N)s.', params={'N': N})
    if mode not in BoundMode.values:
        raise UnsupportedParameterError('Unknown verification mode %(mode)s.', params={'mode': mode})
    quantile = needlecomp_setting('QUANTILE') if quantile is None else quantile
    tol = needlecomp_setting('VERIFY_TOL') if tol is None else tol

    if decomposition is None:
        decomposition = ray_decomposition(space, omega, transport_tol, boundary_correction,
                                          bundle_points=bundle_points)
    if not decomposition.has_densities:
        decomposition = conditional_densities(space, decomposition, bin_width, threads)
    estimator = DerivativeEstimator.EXTRAPOLATED if mode == BoundMode.CD else DerivativeEstimator.LIMSUP
    field = inner_mean_curvature_field(decomposition, estimator)
    notes = list(decomposition.warnings)

    if H_override is not None:
        H_lower = ExtendedReal.of(H_override)
    elif field and sum(sample.surface_mass for sample in field) > 0:
        H_lower = ExtendedReal.of(weighted_quantile([float(sample.value) for sample in field],
                                                    [sample.surface_mass for sample in field], quantile))
    else:
        H_lower = ExtendedReal.negative_infinity()
        notes.append('no boundary rays carry surface mass; H_lower taken as -inf')
        logger.warning(notes[-1])

    r = first_positive_zero(K / (N - 1), float(H_lower) / (N - 1))
    radius = decomposition.signed_distance.inradius(omega)
    allowance = decomposition.signed_distance.mesh_allowance(omega)
    if r.is_finite:
        margin = float(r) - radius
        headroom = margin + allowance
        passed = headroom >= -tol
    else:
        margin, headroom, passed = math.inf, math.inf, True
    logger.info('inradius %.6g (mesh allowance %.3g) vs r_{K,H,N} %s (H_lower %s, %s mode): %s',
                radius, allowance, r, H_lower, mode, 'pass' if passed else 'fail')
    return BoundReport(inradius=radius, H_lower=H_lower, r_comparison=r, passed=bool(passed), margin=margin,
                       tolerance=tol, quantile=quantile, mode=mode, curvature_field=field, warnings=notes,
                       unassigned_fraction=decomposition.unassigned_fraction,
                       H_overridden=H_override is not None,
                       mesh_allowance=allowance, headroom=headroom)


def _boundary_rays(decomposition: RayDecomposition, Y: Optional[Sequence[int]]) -> List[Ray]:
    if Y is None:
        Y = [k for k, ray in enumerate(decomposition.rays) if ray.flag == RayFlag.CROSSES_S]
    rays = [decomposition.rays[k] for k in Y]
    if not rays:
        raise DegenerateInputError('No boundary-crossing rays were selected.')
    return rays


def backward_mc_interval(decomposition: RayDecomposition, Y: Optional[Sequence[int]] = None,
                         window: Optional[float] = None, window_points: Optional[int] = None):
    """
    Level masses p_t(Y) = Σ q_α h_α(t) on a window [−T, 0] evaluated with
    cubic splines, then the largest and smallest window quotients as the
    backward mean curvature readings.
    """
    _require_densities(decomposition)
    rays = _boundary_rays(decomposition, Y)
    window_points = needlecomp_setting('BACKWARD_MC_WINDOW_POINTS') if window_points is None else window_points
    if window is None:
        spacing = float(np.median(np.concatenate([np.diff(ray.density.grid) for ray in rays])))
        window = 4 * spacing
    reach = min(-ray.density.a for ray in rays)
    window = min(window, reach)
    if not window > 0:
        raise DegenerateInputError('The selected rays have no samples before the boundary.')
    times = np.linspace(-window, 0.0, window_points + 1)
    times[-1] = 0.0
    masses = np.zeros_like(times)
    for ray in rays:
        masses += ray.quotient_weight * np.clip(ray.density.spline()(times), 0.0, None)
    if not masses[-1] > 0:
        raise DegenerateInputError('The selected rays carry no surface mass.')
    return backward_mc_bounds(times, masses, window_points)


def backward_mc_estimate(decomposition: RayDecomposition, Y: Optional[Sequence[int]] = None,
                         window: Optional[float] = None, window_points: Optional[int] = None) -> ExtendedReal:
    return backward_mc_interval(decomposition, Y, window, window_points).limsup


def ball_subset(space: DiscreteMMS, center: int, radius: float) -> SubsetSpec:
    """Ω = closed ball of ``radius`` about the sample point ``center``."""
    if not 0 <= center < space.n:
        raise DomainError('Centre %(c)s is not a sample point.', params={'c': center})
    return SubsetSpec(space.rows([center])[0] <= radius)


def level_subset(space: DiscreteMMS, level: float, attribute: str = 't') -> SubsetSpec:
    """Ω = {attribute ≤ level} for a per-point attribute carried by the sample."""
    if attribute not in space.attributes:
        raise DegenerateInputError('The sample carries no attribute %(name)s.', params={'name': attribute})
    values = np.asarray(space.attributes[attribute], dtype=float).reshape(-1)
    if values.size != space.n:
        raise DegenerateInputError('Attribute %(name)s is not a per-point array.', params={'name': attribute})
    return SubsetSpec(values <= level)
