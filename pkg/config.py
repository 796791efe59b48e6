"""
Project Configuration

Paths, version and tolerance defaults shared by every package, plus the
environment-driven thread cap.
"""

import logging
import os

logger = logging.getLogger(__name__)

# Get project root directory
PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(PROJECT_ROOT, 'data')
MAPPINGS_DIR = os.path.join(DATA_DIR, 'mappings')
TRACES_DIR = os.path.join(DATA_DIR, 'traces')
REPORTS_DIR = os.path.join(DATA_DIR, 'reports')

VERSION = "1.0.0"

# Library-wide inequality tolerance: fail only when lhs > rhs*(1+rel) + floor
DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_FLOOR = 1e-12

THREADS_ENV_VAR = 'RSC_FIXPOINT_THREADS'


def thread_cap():
    """
    Maximum number of worker threads for pair and (x1, alpha) sweeps.

    Returns:
        Positive int read from RSC_FIXPOINT_THREADS, 1 when unset or invalid
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return 1

    try:
        value = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r: not an integer", THREADS_ENV_VAR, raw)
        return 1

    if value < 1:
        logger.warning("Ignoring %s=%r: must be positive", THREADS_ENV_VAR, raw)
        return 1

    return value
