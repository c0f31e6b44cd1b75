"""Access to the ``NEEDLECOMP`` defaults block in settings."""

from django.conf import settings

_FALLBACKS = {
    'ROOT_RTOL': 1e-12,
    'SIGMA_EDGE_FRACTION': 1e-12,
    'STABILITY_DELTA_MAX': 0.5,
    'STABILITY_GRID_STEPS': 60,
    'CLOSED_FORM_TOL': 1e-8,
    'SAMPLED_TOL': 1e-4,
    'DERIVATIVE_ORDER': 4,
    'BACKWARD_MC_WINDOW_POINTS': 6,
    'EXTREMAL_SAMPLES': 2001,
    'SIGMA_READING': 'k_over_n_minus_one',
    'SAMPLE_SIZE_CAP': 100_000,
    'VOLUME_SAMPLE_STEPS': 2000,
    'TRANSPORT_TOL': 1e-6,
    'VERIFY_TOL': 1e-6,
    'QUANTILE': 0.05,
    'MAX_UNASSIGNED_FRACTION': 0.2,
    'MIN_CHAIN_POINTS': 4,
    'BUNDLE_POINTS': 300,
    'BOUNDARY_CORRECTION': 'midpoint',
    'METRIC_BLOCK_ROWS': 512,
    'TRIANGLE_CHECK_SAMPLES': 20_000,
    'THREADS': 1,
}


def needlecomp_setting(key):
    block = getattr(settings, 'NEEDLECOMP', None) or {}
    if key in block:
        return block[key]
    return _FALLBACKS[key]


def needlecomp_config():
    """The effective defaults block, as echoed into reports."""
    block = dict(_FALLBACKS)
    block.update(getattr(settings, 'NEEDLECOMP', None) or {})
    return block
