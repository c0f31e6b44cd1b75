"""Closed-form comparison functions, distortion coefficients and the inradius root."""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.optimize import brentq

from common.conf import needlecomp_setting
from common.exceptions import DegenerateInputError, DomainError
from comparison_kernel.models import BallConditionCase, ComparisonTriple, ExtendedReal

logger = logging.getLogger('comparison_kernel')


def _as_output(values, like):
    """Return a Python float for scalar input and an ndarray otherwise."""
    if np.ndim(like) == 0:
        return float(values)
    return values


def cos_kappa(kappa: float, r):
    """Solution of v'' + κv = 0 with v(0) = 1, v'(0) = 0."""
    radii = np.asarray(r, dtype=float)
    if kappa > 0:
        values = np.cos(math.sqrt(kappa) * radii)
    elif kappa == 0:
        values = np.ones_like(radii)
    else:
        values = np.cosh(math.sqrt(-kappa) * radii)
    return _as_output(values, r)


def sin_kappa(kappa: float, r):
    """Solution of v'' + κv = 0 with v(0) = 0, v'(0) = 1."""
    radii = np.asarray(r, dtype=float)
    if kappa > 0:
        root = math.sqrt(kappa)
        values = np.sin(root * radii) / root
    elif kappa == 0:
        values = radii.copy()
    else:
        root = math.sqrt(-kappa)
        values = np.sinh(root * radii) / root
    return _as_output(values, r)


def pi_kappa(kappa: float) -> ExtendedReal:
    if kappa > 0:
        return ExtendedReal(math.pi / math.sqrt(kappa))
    return ExtendedReal.infinity()


def s_kappa_lambda(kappa: float, lam: float, r):
    """cos_κ(r) − λ sin_κ(r)."""
    cos_values = np.asarray(cos_kappa(kappa, r))
    sin_values = np.asarray(sin_kappa(kappa, r))
    if lam == 0:
        values = cos_values
    else:
        values = cos_values - lam * sin_values
    return _as_output(values, r)


def s_kappa_lambda_derivative(kappa: float, lam: float, r):
    """d/dr s_{κ,λ}(r) = −κ sin_κ(r) − λ cos_κ(r)."""
    cos_values = np.asarray(cos_kappa(kappa, r))
    sin_values = np.asarray(sin_kappa(kappa, r))
    values = -kappa * sin_values - lam * cos_values
    return _as_output(values, r)


def ball_condition(kappa: float, lam: float) -> BallConditionCase:
    if kappa > 0:
        return BallConditionCase.POSITIVE_KAPPA
    if kappa == 0 and lam > 0:
        return BallConditionCase.ZERO_KAPPA_POSITIVE_LAMBDA
    if kappa < 0 and lam > math.sqrt(-kappa):
        return BallConditionCase.NEGATIVE_KAPPA_LARGE_LAMBDA
    return BallConditionCase.FAILS


def _closed_form_zero(kappa: float, lam: float) -> float:
    if kappa > 0:
        root = math.sqrt(kappa)
        return math.atan2(root, lam) / root
    if kappa == 0:
        return 1.0 / lam
    root = math.sqrt(-kappa)
    return math.atanh(root / lam) / root


def _bracketed_zero(kappa: float, lam: float, rtol: float) -> float:
    def residual(r):
        return s_kappa_lambda(kappa, lam, r)

    upper = float(pi_kappa(kappa)) if kappa > 0 else 1.0
    if kappa <= 0:
        while residual(upper) > 0:
            upper *= 2.0
            if upper > 1e12:
                raise DegenerateInputError('No sign change of s_{κ,λ} found for κ=%(kappa)s, λ=%(lam)s.',
                                           params={'kappa': kappa, 'lam': lam})
    return brentq(residual, 0.0, upper, rtol=max(rtol, 4 * np.finfo(float).eps), xtol=1e-300)


def first_positive_zero(kappa: float, lam: float, rtol: float | None = None) -> ExtendedReal:
    """
    First positive zero of s_{κ,λ}, or +∞ when the ball condition fails.

    Closed forms are used in all three regimes; the result is re-checked and a
    bracketed Brent search on (0, π_κ] takes over if the residual is poor.
    """
    if ball_condition(kappa, lam) == BallConditionCase.FAILS:
        return ExtendedReal.infinity()
    rtol = needlecomp_setting('ROOT_RTOL') if rtol is None else rtol
    root = _closed_form_zero(kappa, lam)
    if not math.isfinite(lam):
        return ExtendedReal(root)
    scale = abs(cos_kappa(kappa, root)) + abs(lam * sin_kappa(kappa, root)) + 1.0
    if abs(s_kappa_lambda(kappa, lam, root)) > 1e-10 * scale:
        logger.debug('closed form residual too large for κ=%s λ=%s; falling back to brentq', kappa, lam)
        root = _bracketed_zero(kappa, lam, rtol)
    return ExtendedReal(root)


def jacobian_J(p: ComparisonTriple, r):
    """(s_{K/(N−1),H/(N−1)}(r))₊^{N−1}."""
    values = np.asarray(s_kappa_lambda(p.kappa, p.lam, r))
    values = np.maximum(values, 0.0) ** (p.N - 1)
    return _as_output(values, r)


def inradius_comparison_r(p: ComparisonTriple) -> ExtendedReal:
    return first_positive_zero(p.kappa, p.lam)


def sigma_coefficient(kappa: float, t: float, theta: float) -> ExtendedReal:
    """sin_κ(tθ)/sin_κ(θ) for θ below π_κ, σ(0) = t, and +∞ from (1 − 1e−12)·π_κ on."""
    _validate_distortion_arguments(t, theta)
    limit = pi_kappa(kappa)
    if limit.is_finite and theta >= (1.0 - needlecomp_setting('SIGMA_EDGE_FRACTION')) * limit.value:
        return ExtendedReal.infinity()
    if theta == 0:
        return ExtendedReal(float(t))
    return ExtendedReal(sin_kappa(kappa, t * theta) / sin_kappa(kappa, theta))


def sigma_coefficients(kappa: float, t, theta) -> np.ndarray:
    """
    Vectorized σ over broadcast arrays of t and θ.

    Entries where σ is infinite come back as ``np.inf``; callers apply the
    0·∞ = 0 convention themselves.
    """
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    t, theta = np.broadcast_arrays(t, theta)
    out = np.empty(t.shape, dtype=float)
    limit = pi_kappa(kappa)
    if limit.is_finite:
        infinite = theta >= (1.0 - needlecomp_setting('SIGMA_EDGE_FRACTION')) * limit.value
    else:
        infinite = np.zeros(t.shape, dtype=bool)
    at_zero = (theta == 0) & ~infinite
    regular = ~infinite & ~at_zero
    out[infinite] = np.inf
    out[at_zero] = t[at_zero]
    if np.any(regular):
        out[regular] = (np.asarray(sin_kappa(kappa, t[regular] * theta[regular]))
                        / np.asarray(sin_kappa(kappa, theta[regular])))
    return out


def _validate_distortion_arguments(t, theta):
    if not 0.0 <= t <= 1.0:
        raise DomainError('t must lie in [0, 1], got %(t)s.', params={'t': t})
    if theta < 0:
        raise DomainError('θ must be nonnegative, got %(theta)s.', params={'theta': theta})


def sigma_distortion(K: float, N: float, t: float, theta: float) -> ExtendedReal:
    """σ^{(t)}_{K,N}(θ), built on κ = K/N."""
    if N <= 0:
        raise DomainError('N must be positive, got %(N)s.', params={'N': N})
    return sigma_coefficient(K / N, t, theta)


def tau_distortion(K: float, N: float, t: float, theta: float) -> ExtendedReal:
    """t^{1/N}·(σ^{(t)}_{K,N−1}(θ))^{1−1/N} with 0·∞ = 0 and ∞^0 = 1."""
    if N < 1:
        raise DomainError('N must be at least 1, got %(N)s.', params={'N': N})
    _validate_distortion_arguments(t, theta)
    if N == 1:
        return ExtendedReal(float(t))
    sigma = sigma_distortion(K, N - 1, t, theta)
    return ExtendedReal(float(t)).power(1.0 / N).multiply(sigma.power(1.0 - 1.0 / N))


def stability_margin(p_bar: ComparisonTriple, epsilon: float, *, delta_max: float | None = None,
                     grid_steps: int | None = None) -> float:
    """
    Largest δ on the grid δ_max·2^{−k} such that r(K̄−δ, H̄−δ, N̄+δ) ≤ r(K̄, H̄, N̄) + ε.

    The grid is scanned from its smallest point upward and the scan stops at
    the first inadmissible δ, so the result is monotone in ε.
    """
    if not epsilon > 0:
        raise DomainError('ε must be positive, got %(epsilon)s.', params={'epsilon': epsilon})
    base = inradius_comparison_r(p_bar)
    if not base.is_finite:
        raise DegenerateInputError(
            'r(%(K)s, %(H)s, %(N)s) is infinite; the stability estimate holds trivially.',
            params={'K': p_bar.K, 'H': p_bar.H, 'N': p_bar.N},
        )
    delta_max = needlecomp_setting('STABILITY_DELTA_MAX') if delta_max is None else delta_max
    grid_steps = needlecomp_setting('STABILITY_GRID_STEPS') if grid_steps is None else grid_steps
    target = base.value + epsilon

    best = None
    for k in range(grid_steps, -1, -1):
        delta = delta_max * 2.0 ** (-k)
        perturbed = p_bar.perturbed(delta)
        if inradius_comparison_r(perturbed) <= target:
            best = delta
        else:
            break
    if best is None:
        raise DegenerateInputError('No admissible δ on the search grid for ε=%(epsilon)s.',
                                   params={'epsilon': epsilon})
    logger.info('stability margin for %s at ε=%s: δ=%s', p_bar.to_json(), epsilon, best)
    return best
