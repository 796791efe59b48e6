"""
Fixed-Point Search

Grid scan of the residual with local refinement. On the line, sign changes of
Tx - x are bisected; in higher dimensions the lowest-residual grid points are
refined by iterating the averaged operator. Fixed points of pathological maps
(isolated points between grid nodes without a sign change, for instance) can
be missed.
"""

import logging

import numpy as np

from iterate.mann import relaxed_step

logger = logging.getLogger(__name__)

BISECTION_STEPS = 80
REFINE_ALPHA = 0.5
REFINE_STEPS = 10_000
SEEDS = 16


def _dedupe(points, radius):
    # points arrive sorted, so on the line only the last kept point can be close
    kept = []
    for x in points:
        pool = kept[-1:] if len(x) == 1 else kept
        if all(np.max(np.abs(x - k)) > radius * (1.0 + np.max(np.abs(k))) for k in pool):
            kept.append(x)
    return kept


def _bisect(mapping, lo, hi):
    """Vectorized bisection of Tx - x on the cells [lo, hi] (1D)."""
    f_lo = mapping.evaluate_many(lo[:, None])[:, 0] - lo
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        f_mid = mapping.evaluate_many(mid[:, None])[:, 0] - mid
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _scan_line(mapping, grid_points, refine_tol):
    g = mapping.domain.grid(grid_points)[:, 0]
    s = mapping.evaluate_many(g[:, None])[:, 0] - g
    candidates = list(g[np.abs(s) <= refine_tol])

    cells = np.flatnonzero(s[:-1] * s[1:] < 0.0)
    if len(cells):
        candidates.extend(_bisect(mapping, g[cells], g[cells + 1]))
    return [np.array([c]) for c in sorted(candidates)]


def _scan_grid(mapping, grid_points, refine_tol):
    g = mapping.domain.grid(grid_points)
    r = mapping.residuals(g)
    exact = g[r <= refine_tol]
    order = np.argsort(r, kind='stable')[:SEEDS]
    seeds = g[order[r[order] > refine_tol]]

    refined = []
    x = seeds.copy()
    for _ in range(REFINE_STEPS):
        if not len(x):
            break
        x = relaxed_step(mapping, REFINE_ALPHA, x)
        done = mapping.residuals(x) <= refine_tol
        refined.extend(x[done])
        x = x[~done]
    return sorted(list(exact) + refined, key=lambda v: tuple(v))


def find_fixed_points(mapping, grid_points=1001, refine_tol=1e-12):
    """
    Approximate F(T) on a grid.

    Args:
        mapping: MappingDef
        grid_points: Grid points per axis
        refine_tol: Residual a returned point must reach

    Returns:
        List of points (1D arrays) with ||Tx - x|| <= refine_tol, deduplicated
    """
    if mapping.dim == 1:
        candidates = _scan_line(mapping, grid_points, refine_tol)
    else:
        candidates = _scan_grid(mapping, grid_points, refine_tol)

    if candidates:
        residuals = mapping.residuals(np.asarray(candidates))
        candidates = [c for c, res in zip(candidates, residuals) if res <= refine_tol]

    found = _dedupe(candidates, max(10.0 * refine_tol, 1e-9))
    logger.info("Found %d fixed point(s) of %s on a %d-point grid", len(found), mapping.name, grid_points)
    return found
