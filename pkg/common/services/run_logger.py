"""Structured run-event logging for CLI invocations."""

from __future__ import annotations

import logging
from typing import Any, Dict, Optional

from django.utils import timezone

logger = logging.getLogger('common')

CATEGORY_KERNEL = 'kernel'
CATEGORY_NEEDLE = 'needle'
CATEGORY_MODEL = 'model'
CATEGORY_DECOMPOSITION = 'decomposition'
CATEGORY_GENERAL = 'general'

EVENT_CATEGORY_MAP = {
    'bound.computed': CATEGORY_KERNEL,
    'bound.error': CATEGORY_KERNEL,
    'stability.passed': CATEGORY_KERNEL,
    'stability.failed': CATEGORY_KERNEL,
    'stability.error': CATEGORY_KERNEL,
    'needle_check.passed': CATEGORY_NEEDLE,
    'needle_check.failed': CATEGORY_NEEDLE,
    'needle_check.error': CATEGORY_NEEDLE,
    'extremal.written': CATEGORY_NEEDLE,
    'extremal.error': CATEGORY_NEEDLE,
    'model.passed': CATEGORY_MODEL,
    'model.failed': CATEGORY_MODEL,
    'model.error': CATEGORY_MODEL,
    'verify.passed': CATEGORY_DECOMPOSITION,
    'verify.failed': CATEGORY_DECOMPOSITION,
    'verify.error': CATEGORY_DECOMPOSITION,
    'decomposition.degenerate': CATEGORY_DECOMPOSITION,
}

FAILURE_SUFFIXES = ('.failed', '.error', '.degenerate')


def log_run_event(
    event_key: str,
    *,
    metadata: Optional[Dict[str, Any]] = None,
    category: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Emit one structured record describing a finished run.

    Parameters
    ----------
    event_key:
        Dot-notation identifier (e.g., ``verify.passed``).
    metadata:
        Optional structured context (digest, headline numbers).
    category:
        Overrides default category inference if provided.

    Returns the record that was logged so callers can attach it to a report.
    """

    payload = metadata.copy() if metadata else {}
    resolved_category = category or EVENT_CATEGORY_MAP.get(event_key, CATEGORY_GENERAL)
    record = {
        'event_key': event_key,
        'category': resolved_category,
        'metadata': payload,
        'logged_at': timezone.now().isoformat(),
    }
    level = logging.WARNING if event_key.endswith(FAILURE_SUFFIXES) else logging.INFO
    logger.log(level, '%s [%s] %s', event_key, resolved_category, payload)
    return record
