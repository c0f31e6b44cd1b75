"""Checks and constructions for one-dimensional needle densities."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from scipy import linalg

from common.conf import needlecomp_setting
from common.exceptions import DegenerateInputError, DomainError, PreconditionViolation
from comparison_kernel.models import ComparisonTriple, ExtendedReal
from comparison_kernel.services import (
    cos_kappa,
    first_positive_zero,
    inradius_comparison_r,
    jacobian_J,
    pi_kappa,
    s_kappa_lambda,
    sigma_coefficients,
    sin_kappa,
)
from needle_1d.models import (
    BackwardMCBounds,
    ConcavityReport,
    DerivativeEstimator,
    EnvelopeResult,
    MCPBoundResult,
    MeanCurvatureValue,
    NeedleDensity,
    SigmaReading,
)

logger = logging.getLogger('needle_1d')

BOUNDARY_FIT_WINDOW = 0.8


def _require_dimension(N: float):
    if not N > 1:
        raise DomainError('N must exceed 1, got %(N)s.', params={'N': N})


def _thinned_indices(size: int, keep: Optional[int], must_keep=()) -> np.ndarray:
    if keep is None or size <= keep:
        return np.arange(size)
    picked = np.unique(np.round(np.linspace(0, size - 1, keep)).astype(int))
    return np.union1d(picked, np.asarray(must_keep, dtype=int))


def _weighted(coefficients: np.ndarray, values) -> np.ndarray:
    """coefficient·value with 0·∞ = 0."""
    with np.errstate(invalid='ignore'):
        product = coefficients * values
    return np.where(values == 0, 0.0, product)


def _triple_count(size: int) -> int:
    return size * (size - 1) * (size - 2) // 6


def _iterate_triples(r: np.ndarray):
    """Yield, for each left end r₀, the vectorized pairs (r_t, r₁) to its right."""
    count = r.size
    for i in range(count - 2):
        j, k = np.triu_indices(count - i - 1, k=1)
        j, k = j + i + 1, k + i + 1
        theta = r[k] - r[i]
        t = (r[j] - r[i]) / theta
        yield i, j, k, t, theta


def _cd_lower(kappa: float, r: np.ndarray, f: np.ndarray, i, j, k):
    """σ^{(1−t)}(θ)·f(r₀) + σ^{(t)}(θ)·f(r₁) for the triples (i, j, k)."""
    theta = r[k] - r[i]
    t = (r[j] - r[i]) / theta
    return (_weighted(sigma_coefficients(kappa, 1.0 - t, theta), f[i])
            + _weighted(sigma_coefficients(kappa, t, theta), f[k]))


def _sigma_cap(kappa: float) -> float:
    limit = pi_kappa(kappa)
    if not limit.is_finite:
        return math.inf
    return (1.0 - needlecomp_setting('SIGMA_EDGE_FRACTION')) * limit.value


def _upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the upper convex hull of points sorted by x; collinear points are dropped."""
    hull = []
    for index in range(x.size):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (x[a] - x[o]) * (y[index] - y[o]) - (y[a] - y[o]) * (x[index] - x[o])
            if cross < 0:
                break
            hull.pop()
        hull.append(index)
    return np.asarray(hull, dtype=int)


def _cd_worst_triple(kappa: float, r: np.ndarray, f: np.ndarray):
    """
    The triple with the largest two-endpoint violation, over all grid triples.

    In the frame w = cos_κ(r − c), τ = tan_κ(r − c) about the midpoint c the
    κ-affine chord through (r₀, f₀), (r₁, f₁) is w times the straight chord of
    g = f/w over τ, so the best chord across r_t is the upper hull of (τ, g)
    with r_t itself removed. Needs every span below the σ cap.
    """
    centre = 0.5 * (r[0] + r[-1])
    w = np.asarray(cos_kappa(kappa, r - centre))
    tau = np.asarray(sin_kappa(kappa, r - centre)) / w
    g = f / w
    hull = _upper_hull(tau, g)
    on_hull = np.zeros(r.size, dtype=bool)
    on_hull[hull] = True

    best, where = -math.inf, None
    off = np.flatnonzero(~on_hull)
    if off.size:
        slot = np.searchsorted(hull, off)
        a, b = hull[slot - 1], hull[slot]
        chord = g[a] + (g[b] - g[a]) * (tau[off] - tau[a]) / (tau[b] - tau[a])
        excess = w[off] * (chord - g[off])
        position = int(np.argmax(excess))
        best, where = float(excess[position]), (int(a[position]), int(off[position]), int(b[position]))
    for position in range(1, hull.size - 1):
        a, j, b = hull[position - 1], hull[position], hull[position + 1]
        left = np.arange(a, j)[:, None]
        right = np.arange(j + 1, b + 1)[None, :]
        chord = g[left] + (g[right] - g[left]) * (tau[j] - tau[left]) / (tau[right] - tau[left])
        p, q = np.unravel_index(int(np.argmax(chord)), chord.shape)
        excess = float(w[j] * (chord[p, q] - g[j]))
        if excess > best:
            best, where = excess, (int(left[p, 0]), int(j), int(right[0, q]))
    return where


def _infinite_cd_triple(kappa: float, r: np.ndarray, f: np.ndarray):
    """A triple whose span reaches the σ cap with mass at an end, if there is one."""
    reach = np.searchsorted(r, r + _sigma_cap(kappa), side='left')
    for i in range(r.size - 2):
        k = max(int(reach[i]), i + 2)
        if k >= r.size:
            break
        if f[i] > 0:
            return i, i + 1, k
        massive = np.flatnonzero(f[k:] > 0)
        if massive.size:
            return i, i + 1, k + int(massive[0])
    return None


def _report(worst, where, grid, tol, checked) -> ConcavityReport:
    triple = None
    if where is not None:
        triple = tuple(float(grid[index]) for index in where)
    return ConcavityReport(
        passed=bool(worst <= tol),
        worst_violation=float(worst),
        worst_triple=triple,
        tolerance=float(tol),
        checked=int(checked),
    )


def _checked_grid(h: NeedleDensity, N: float, max_points: Optional[int]):
    if np.unique(h.grid).size < 3:
        raise DegenerateInputError('At least three distinct abscissae are needed.')
    indices = _thinned_indices(h.grid.size, max_points, must_keep=(0, h.zero_index, h.grid.size - 1))
    return h.grid[indices], h.powered(1.0 / (N - 1))[indices]


def check_cd_density(h: NeedleDensity, K: float, N: float, tol: Optional[float] = None,
                     max_points: Optional[int] = None) -> ConcavityReport:
    """
    Check the two-endpoint concavity inequality of h^{1/(N−1)} over all grid triples.

    For r₀ < r_t < r₁ and t = (r_t − r₀)/(r₁ − r₀) the inequality reads
    f(r_t) ≥ σ^{(1−t)}(r₁ − r₀)·f(r₀) + σ^{(t)}(r₁ − r₀)·f(r₁) with f = h^{1/(N−1)}
    and σ built on κ = K/(N−1). The worst triple comes from an upper hull
    in the κ-projective frame; spherical supports reaching the σ cap fall
    back to a direct scan. ``max_points`` thins the grid evenly first (end
    points and 0 kept); by default every sample takes part.
    """
    _require_dimension(N)
    tol = needlecomp_setting('CLOSED_FORM_TOL') if tol is None else tol
    kappa = K / (N - 1)
    r, f = _checked_grid(h, N, max_points)

    where = None
    if r[-1] - r[0] < _sigma_cap(kappa):
        where = _cd_worst_triple(kappa, r, f)
    else:
        where = _infinite_cd_triple(kappa, r, f)
        if where is not None and not math.isinf(float(_cd_lower(kappa, r, f, *where))):
            where = None
        if where is None:
            worst = -math.inf
            for i, j, k, t, theta in _iterate_triples(r):
                violation = _cd_lower(kappa, r, f, i, j, k) - f[j]
                position = int(np.argmax(violation))
                if violation[position] > worst:
                    worst, where = violation[position], (i, int(j[position]), int(k[position]))
    worst = float(_cd_lower(kappa, r, f, *where) - f[where[1]])
    report = _report(worst, where, r, tol, _triple_count(r.size))
    logger.debug('CD(%s, %s) check on %s triples: worst %s', K, N, report.checked, report.worst_violation)
    return report


def check_mcp_density(h: NeedleDensity, K: float, N: float, tol: Optional[float] = None,
                      sigma_reading: str = SigmaReading.K_OVER_N_MINUS_ONE,
                      max_points: Optional[int] = None) -> ConcavityReport:
    """
    Check the one-endpoint inequality f(r_t) ≥ σ^{(1−t)}(θ)·f(r₀) in both orientations.

    ``sigma_reading`` selects κ = K/(N−1) (the reading under which every CD
    density passes) or κ = K/N. Over all triples: σ^{(1−t)}(θ) grows with
    the far end r₁ and σ^{(t)}(θ) with the distance to r₀, so the last and
    the first sample are the worst far ends.
    """
    _require_dimension(N)
    tol = needlecomp_setting('CLOSED_FORM_TOL') if tol is None else tol
    if sigma_reading == SigmaReading.K_N:
        kappa = K / N
    elif sigma_reading == SigmaReading.K_OVER_N_MINUS_ONE:
        kappa = K / (N - 1)
    else:
        raise DomainError('Unknown σ reading %(reading)s.', params={'reading': sigma_reading})
    r, f = _checked_grid(h, N, max_points)

    last = r.size - 1
    worst, where = -math.inf, None
    for j in range(1, last):
        left = np.arange(j)
        theta = r[last] - r[left]
        from_left = _weighted(sigma_coefficients(kappa, (r[last] - r[j]) / theta, theta), f[left]) - f[j]
        position = int(np.argmax(from_left))
        if from_left[position] > worst:
            worst, where = from_left[position], (int(left[position]), j, last)
        right = np.arange(j + 1, r.size)
        theta = r[right] - r[0]
        from_right = _weighted(sigma_coefficients(kappa, (r[j] - r[0]) / theta, theta), f[right]) - f[j]
        position = int(np.argmax(from_right))
        if from_right[position] > worst:
            worst, where = from_right[position], (0, j, int(right[position]))
    return _report(worst, where, r, tol, 2 * _triple_count(r.size))


def _neville_at_zero(steps: np.ndarray, quotients: np.ndarray) -> float:
    """Polynomial extrapolation of quotients(steps) to step 0."""
    table = np.array(quotients, dtype=float)
    count = table.size
    for level in range(1, count):
        for index in range(count - level):
            near, far = steps[index], steps[index + level]
            table[index] = (far * table[index] - near * table[index + 1]) / (far - near)
    return float(table[0])


def _one_sided_quotients(grid, samples, index, side, count):
    if side == 'left':
        neighbours = np.arange(index - 1, max(index - 1 - count, -1), -1)
    else:
        neighbours = np.arange(index + 1, min(index + 1 + count, grid.size))
    offsets = grid[neighbours] - grid[index]
    return offsets, (samples[neighbours] - samples[index]) / offsets


def sampled_one_sided_derivative(grid: np.ndarray, samples: np.ndarray, index: int, side: str,
                                 order: Optional[int] = None) -> float:
    """Richardson-extrapolated one-sided derivative of finite samples at grid[index]."""
    order = needlecomp_setting('DERIVATIVE_ORDER') if order is None else order
    offsets, quotients = _one_sided_quotients(grid, samples, index, side, order)
    if offsets.size == 0:
        raise DegenerateInputError('No grid points on the %(side)s of %(at)s.',
                                   params={'side': side, 'at': float(grid[index])})
    return _neville_at_zero(offsets, quotients)


def one_sided_log_derivative(h: NeedleDensity, at: float, side: str = 'left',
                             order: Optional[int] = None,
                             estimator: str = DerivativeEstimator.EXTRAPOLATED) -> ExtendedReal:
    """
    One-sided derivative of log h at a grid abscissa.

    A vanishing density gives −∞ from the left and +∞ from the right; a
    vanishing neighbour gives the opposite infinity. The ``limsup`` estimator
    returns the largest quotient in the window instead of extrapolating.
    """
    if side not in ('left', 'right'):
        raise DomainError('side must be "left" or "right", got %(side)s.', params={'side': side})
    index = h.index_of(at)
    if (side == 'left' and index == 0) or (side == 'right' and index == h.grid.size - 1):
        raise DegenerateInputError('%(at)s is the extreme grid point on the %(side)s.',
                                   params={'at': at, 'side': side})
    if h.values[index] == 0:
        return ExtendedReal.negative_infinity() if side == 'left' else ExtendedReal.infinity()
    order = needlecomp_setting('DERIVATIVE_ORDER') if order is None else order
    neighbour = index - 1 if side == 'left' else index + 1
    if h.values[neighbour] == 0:
        return ExtendedReal.infinity() if side == 'left' else ExtendedReal.negative_infinity()

    # stop the stencil before the first vanishing sample
    positive = h.values > 0
    if side == 'left':
        blocked = np.flatnonzero(~positive[:index])
        usable = index - (blocked[-1] + 1 if blocked.size else 0)
    else:
        blocked = np.flatnonzero(~positive[index + 1:])
        usable = blocked[0] if blocked.size else h.grid.size - 1 - index
    count = max(1, min(order, usable))
    offsets, quotients = _one_sided_quotients(h.grid, np.log(np.where(positive, h.values, 1.0)),
                                              index, side, count)
    if estimator == DerivativeEstimator.LIMSUP:
        return ExtendedReal(float(np.max(quotients)))
    return ExtendedReal(_neville_at_zero(offsets, quotients))


def inner_mean_curvature_from_density(h: NeedleDensity,
                                      estimator: str = DerivativeEstimator.EXTRAPOLATED,
                                      order: Optional[int] = None) -> MeanCurvatureValue:
    """Left log-derivative of h at 0; −∞ when h(0) = 0."""
    return MeanCurvatureValue(one_sided_log_derivative(h, 0.0, 'left', order=order, estimator=estimator))


def mean_curvature_from_boundary_mass(depths, masses, window: Optional[float] = None):
    """
    Least-squares fit of the mass within depth s of the boundary by
    c + a·s + b·s² on [0, window], 0.8 of the deepest sample by default.

    Returns (a, H) where a is the density at the boundary and H = −2b/a its
    left log-derivative there. The constant absorbs a uniform offset of the
    sampled depths. Each sample counts half its own mass at its depth.
    """
    depths = np.asarray(depths, dtype=float).reshape(-1)
    masses = np.asarray(masses, dtype=float).reshape(-1)
    if depths.size != masses.size:
        raise DegenerateInputError('Depths and masses differ in length.')
    if depths.size and (depths.min() < 0 or masses.min() < 0):
        raise DomainError('Depths and masses must be nonnegative.')
    order = np.argsort(depths, kind='stable')
    depths, masses = depths[order], masses[order]
    if window is None:
        window = BOUNDARY_FIT_WINDOW * (depths[-1] if depths.size else 0.0)
    keep = (depths <= window) & (depths > 0)
    if np.count_nonzero(keep) < 4:
        raise DegenerateInputError('At least 4 samples inside the fit window are required.')
    cumulative = np.cumsum(masses) - 0.5 * masses
    s = depths[keep]
    (_, a, b), *_ = linalg.lstsq(np.column_stack([np.ones_like(s), s, s * s]), cumulative[keep])
    if not a > 0:
        raise DegenerateInputError('The mass profile has no positive density at the boundary.')
    return float(a), MeanCurvatureValue(ExtendedReal(float(-2 * b / a)))


def comparison_envelope(h: NeedleDensity, K: float, N: float,
                        tol: Optional[float] = None) -> EnvelopeResult:
    """
    Below-tangent envelope (f(0)·cos_κ + d⁺f(0)·sin_κ)₊^{N−1} with f = h^{1/(N−1)}, κ = K/(N−1).

    A density living on [a, 0] is handled through its reflection r ↦ h(−r),
    and the implied bound is then −a ≤ r_{K,H̃,N}. The report's violations are
    h − envelope on the grid plus the excess of the length over ``max_b``.
    """
    _require_dimension(N)
    tol = needlecomp_setting('CLOSED_FORM_TOL') if tol is None else tol
    reverse = h.b <= 0
    oriented = h.reflected() if reverse else h
    kappa = K / (N - 1)
    exponent = 1.0 / (N - 1)
    zero = oriented.zero_index
    f = oriented.powered(exponent)
    f0 = float(f[zero])
    slope = sampled_one_sided_derivative(oriented.grid, f, zero, 'right')

    if f0 > 0:
        log_slope = (N - 1) * slope / f0
        mean_curvature = ExtendedReal(-log_slope)
        max_b = first_positive_zero(kappa, -log_slope / (N - 1))
    else:
        mean_curvature = ExtendedReal.negative_infinity()
        max_b = None

    def envelope(r):
        local = -np.asarray(r, dtype=float) if reverse else np.asarray(r, dtype=float)
        base = f0 * np.asarray(cos_kappa(kappa, local)) + slope * np.asarray(sin_kappa(kappa, local))
        values = np.maximum(base, 0.0) ** (N - 1)
        return float(values) if np.ndim(r) == 0 else values

    ahead = oriented.grid >= 0
    radii = oriented.grid[ahead]
    excess = oriented.values[ahead] - np.asarray(
        envelope(-radii if reverse else radii), dtype=float)
    position = int(np.argmax(excess))
    worst = float(excess[position])
    location = float(radii[position]) * (-1.0 if reverse else 1.0)
    length = float(oriented.b)
    if max_b is not None and length - float(max_b) > worst:
        worst = length - float(max_b)
        location = length * (-1.0 if reverse else 1.0)
    report = ConcavityReport(
        passed=bool(worst <= tol),
        worst_violation=worst,
        worst_triple=(location, location, location),
        tolerance=float(tol),
        checked=int(radii.size),
    )
    if not report.passed:
        logger.warning('density exceeds its comparison envelope by %s at r=%s', worst, location)
    return EnvelopeResult(envelope=envelope, max_b=max_b, length=length,
                          mean_curvature=mean_curvature, reversed=reverse, report=report)


def _second_difference(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    left = np.diff(grid)[:-1]
    right = np.diff(grid)[1:]
    return 2.0 * (values[2:] * left - values[1:-1] * (left + right) + values[:-2] * right) / (
        left * right * (left + right))


def _nonincreasing_report(grid, numerator, denominator, upto, tol, label) -> ConcavityReport:
    """
    Check numerator/denominator is nonincreasing on grid points up to and
    including ``upto``. Growth is measured per unit length, relative to the
    ratio, so ``tol`` bounds a derivative and does not depend on the step.
    Where both sides are at roundoff level (a shared zero) the point is skipped.
    """
    inside = grid <= upto
    worst, location = -math.inf, None
    ratios = np.full(grid.shape, np.nan)
    floor = 64.0 * np.finfo(float).eps
    valid = inside & (denominator > floor * np.max(np.abs(denominator)))
    ratios[valid] = numerator[valid] / denominator[valid]
    broken = inside & ~valid & (numerator > floor * np.max(np.abs(numerator)))
    if np.any(broken):
        worst = math.inf
        location = float(grid[np.flatnonzero(broken)[0]])
    pairs = np.flatnonzero(valid[:-1] & valid[1:])
    if pairs.size:
        growth = (ratios[pairs + 1] - ratios[pairs]) / (
            np.maximum(1.0, np.abs(ratios[pairs])) * (grid[pairs + 1] - grid[pairs]))
        position = int(np.argmax(growth))
        if growth[position] > worst:
            worst = float(growth[position])
            location = float(grid[pairs[position]])
    if location is None:
        worst = 0.0
        location = float(grid[0])
    logger.debug('%s: worst relative growth %s at %s', label, worst, location)
    return ConcavityReport(passed=bool(worst <= tol), worst_violation=float(worst),
                           worst_triple=(location, location, location), tolerance=float(tol),
                           checked=int(pairs.size))


def riccati_compare(u: NeedleDensity, kappa: float, d: float,
                    tol: Optional[float] = None) -> ConcavityReport:
    """
    Compare u with v = cos_κ + d·sin_κ on [0, b].

    Checks b ≤ first zero of v and d⁺ log u ≤ (log v)′, the latter through the
    equivalent statement that u/v does not increase between grid points.
    """
    tol = needlecomp_setting('CLOSED_FORM_TOL') if tol is None else tol
    if u.a != 0:
        raise DomainError('Riccati samples must start at 0, got a=%(a)s.', params={'a': u.a})
    if abs(u.values[0] - 1.0) > 1e-9:
        raise PreconditionViolation('u(0) must equal 1, got %(u0)s.', params={'u0': float(u.values[0])})
    grid = u.grid
    curvature = _second_difference(grid, u.values) + kappa * u.values[1:-1]
    spacing = np.diff(grid)
    roundoff = 64.0 * np.finfo(float).eps * float(np.max(np.abs(u.values))) / float(np.min(spacing)) ** 2
    allowance = 10.0 * u.step ** 2 + roundoff
    if np.any(curvature > allowance):
        worst = int(np.argmax(curvature))
        raise PreconditionViolation(
            "u'' + κu is positive (%(value)s) at t=%(t)s.",
            params={'value': float(curvature[worst]), 't': float(grid[worst + 1])},
        )
    initial_slope = sampled_one_sided_derivative(grid, u.values, 0, 'right')
    if initial_slope > d + max(tol, allowance):
        raise PreconditionViolation("u'(0)=%(slope)s exceeds d=%(d)s.",
                                    params={'slope': initial_slope, 'd': d})

    zero = first_positive_zero(kappa, -d)
    v = np.asarray(s_kappa_lambda(kappa, -d, grid))
    report = _nonincreasing_report(grid, u.values, v, u.b, tol, 'riccati')
    if u.b > float(zero) + tol:
        return ConcavityReport(passed=False, worst_violation=u.b - float(zero),
                               worst_triple=(u.b, u.b, u.b), tolerance=float(tol),
                               checked=report.checked)
    return report


def extremal_density(K: float, H: float, N: float, h0: float = 1.0,
                     samples: Optional[int] = None) -> NeedleDensity:
    """h(r) = h0·J_{K,H,N}(−r) on [−r_{K,H,N}, 0]."""
    if not h0 > 0:
        raise DomainError('h0 must be positive, got %(h0)s.', params={'h0': h0})
    p = ComparisonTriple(K, H, N)
    radius = inradius_comparison_r(p)
    if not radius.is_finite:
        raise DegenerateInputError(
            'r(%(K)s, %(H)s, %(N)s) is infinite; no extremal density exists.',
            params={'K': K, 'H': H, 'N': N},
        )
    samples = needlecomp_setting('EXTREMAL_SAMPLES') if samples is None else samples
    grid = np.linspace(-radius.value, 0.0, max(int(samples), 4))
    values = h0 * np.asarray(jacobian_J(p, -grid))
    values[0] = 0.0
    return NeedleDensity(grid, values)


def laplace_comparison_check(h: NeedleDensity, K: float, N: float, chi: float,
                             tol: Optional[float] = None) -> ConcavityReport:
    """
    Needle form of the Laplace comparison for the distance to the complement.

    With h̃(r) = h(−r) the bound d⁺ log h̃ ≤ (N−1)·s′/s, s = s_{K/(N−1),χ},
    is checked as monotonicity of h̃/s^{N−1} on (0, −a).
    """
    _require_dimension(N)
    tol = needlecomp_setting('CLOSED_FORM_TOL') if tol is None else tol
    curvature = inner_mean_curvature_from_density(h).value
    if curvature < chi * (N - 1) - tol:
        raise PreconditionViolation(
            'Inner mean curvature %(H)s is below χ(N−1)=%(bound)s.',
            params={'H': str(curvature), 'bound': chi * (N - 1)},
        )
    tilde = h.reflected()
    kappa = K / (N - 1)
    ahead = tilde.grid >= 0
    radii = tilde.grid[ahead]
    s = np.asarray(s_kappa_lambda(kappa, chi, radii))
    comparison = np.where(s > 0, np.maximum(s, 0.0) ** (N - 1), 0.0)
    comparison[s <= 0] = -1.0
    return _nonincreasing_report(radii, tilde.values[ahead], comparison, tilde.b, tol, 'laplace')


def mcp_inradius_bound(h: NeedleDensity, K: float, N: float, H: float, tol: Optional[float] = None,
                       check_hypotheses: bool = False) -> MCPBoundResult:
    """−a ≤ r_{K,H,N} for a density satisfying the one-endpoint inequality with mean curvature ≥ H."""
    _require_dimension(N)
    tol = needlecomp_setting('CLOSED_FORM_TOL') if tol is None else tol
    max_length = first_positive_zero(K / (N - 1), H / (N - 1))
    length = -h.a
    passed = max_length.is_positive_infinity or length <= max_length.value + tol
    margin = math.inf if max_length.is_positive_infinity else max_length.value - length
    hypotheses = None
    if check_hypotheses:
        curvature = inner_mean_curvature_from_density(h, estimator=DerivativeEstimator.LIMSUP).value
        hypotheses = bool(check_mcp_density(h, K, N, tol=needlecomp_setting('SAMPLED_TOL')).passed
                          and curvature >= H - needlecomp_setting('SAMPLED_TOL'))
    return MCPBoundResult(max_length=max_length, length=length, passed=bool(passed),
                          margin=float(margin), hypotheses_hold=hypotheses)


def _level_mass_quotients(t, masses, window_points):
    t = np.asarray(t, dtype=float).reshape(-1)
    masses = np.asarray(masses, dtype=float).reshape(-1)
    if t.shape != masses.shape:
        raise DegenerateInputError('Level times and masses differ in length.')
    order = np.argsort(t)
    t, masses = t[order], masses[order]
    if t[-1] != 0 or np.any(t > 0):
        raise DomainError('Level masses must be sampled on [−T, 0] including t = 0.')
    if np.any(masses < 0):
        raise DomainError('Level masses must be nonnegative.')
    p0 = masses[-1]
    if not p0 > 0:
        raise DegenerateInputError('The level mass at t = 0 vanishes.')
    window_points = needlecomp_setting('BACKWARD_MC_WINDOW_POINTS') if window_points is None else window_points
    times = t[:-1][-window_points:]
    if times.size == 0:
        raise DegenerateInputError('No level masses before t = 0.')
    quotients = (masses[:-1][-window_points:] - p0) / (times * p0)
    return times, quotients


def backward_mc_bounds(t, masses, window_points: Optional[int] = None) -> BackwardMCBounds:
    """
    Largest and smallest quotients (p_t − p_0)/(t·p_0) over the last
    ``window_points`` levels before t = 0, as readings of the lim sup and
    lim inf as t ↑ 0.
    """
    _, quotients = _level_mass_quotients(t, masses, window_points)
    return BackwardMCBounds(limsup=ExtendedReal(float(np.max(quotients))),
                            liminf=ExtendedReal(float(np.min(quotients))))


def backward_mc_from_level_masses(t, masses, window_points: Optional[int] = None) -> ExtendedReal:
    return backward_mc_bounds(t, masses, window_points).limsup
