"""
Condition Classifiers

Sample-based classification of a mapping against the nonexpansive,
condition (C), Reich-Suzuki-(C) and quasi-nonexpansive conditions, plus the
shared pair-sweep engine the inequality verifiers build on.

A "pass" verdict means that no counterexample was found on the plan.
"""

import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from conditions.plans import chunk_count, pair_chunks, sample_points
from conditions.reports import MAX_WITNESSES, ConditionReport, Witness, merge_reports, rank_witnesses
from config import thread_cap
from errors import InputError
from space.norms import Tolerance, norms
from verdicts import Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairBlock:
    """Distances for a block of ordered pairs (x_i, y_j) of sample points."""

    x: np.ndarray
    y: np.ndarray
    d_xy: np.ndarray
    d_txty: np.ndarray
    d_xty: np.ndarray
    r_x: np.ndarray
    r_y: np.ndarray


@dataclass(frozen=True)
class SweepContext:
    points: np.ndarray
    images: np.ndarray
    residuals: np.ndarray


def build_context(mapping, points):
    images = mapping.evaluate_many(points)
    return SweepContext(points=points, images=images, residuals=norms(mapping.space, images - points))


def _block(space, ctx, i, j):
    x, y = ctx.points[i], ctx.points[j]
    tx, ty = ctx.images[i], ctx.images[j]
    return PairBlock(
        x=x,
        y=y,
        d_xy=norms(space, x - y),
        d_txty=norms(space, tx - ty),
        d_xty=norms(space, x - ty),
        r_x=ctx.residuals[i],
        r_y=ctx.residuals[j],
    )


def _evaluate_chunk(condition, space, ctx, i, j, premise, clauses, tolerance, limit):
    block = _block(space, ctx, i, j)
    held = premise(block) if premise is not None else np.ones(len(i), dtype=bool)

    failing = np.zeros(len(i), dtype=bool)
    worst_lhs = np.zeros(len(i))
    worst_rhs = np.zeros(len(i))
    worst_gap = np.full(len(i), -np.inf)
    worst_clause = np.zeros(len(i), dtype=int)
    details = {}

    for k, (label, clause) in enumerate(clauses):
        lhs, rhs = clause(block)
        bad = held & tolerance.exceeds(lhs, rhs)
        failing |= bad
        gap = np.where(bad, lhs - rhs, -np.inf)
        better = gap > worst_gap
        worst_gap = np.where(better, gap, worst_gap)
        worst_lhs = np.where(better, lhs, worst_lhs)
        worst_rhs = np.where(better, rhs, worst_rhs)
        worst_clause = np.where(better, k, worst_clause)

        positive = held & (rhs > 0.0)
        ratio = float((lhs[positive] / rhs[positive]).max()) if positive.any() else None
        suffix = '' if len(clauses) == 1 else f"_{label}"
        details[f"max_ratio{suffix}"] = ratio
        details[f"failing_pairs{suffix}"] = int(bad.sum())

    if len(clauses) > 1:
        details['failing_pairs'] = int(failing.sum())

    witnesses = []
    if failing.any():
        idx = np.flatnonzero(failing)
        # one candidate per distinct (i, j); random plans may repeat pairs
        _, first = np.unique(i[idx] * len(ctx.points) + j[idx], return_index=True)
        idx = idx[np.sort(first)]
        keys = [block.y[idx, c] for c in reversed(range(block.y.shape[1]))]
        keys += [block.x[idx, c] for c in reversed(range(block.x.shape[1]))]
        keys.append(-worst_gap[idx])
        idx = idx[np.lexsort(keys)][:limit]
        witnesses = [
            Witness(
                x=tuple(block.x[k].tolist()),
                y=tuple(block.y[k].tolist()),
                lhs=float(worst_lhs[k]),
                rhs=float(worst_rhs[k]),
                clause=clauses[worst_clause[k]][0],
            )
            for k in idx
        ]

    checked = int(held.sum())
    return ConditionReport(
        condition=condition,
        verdict=Verdict.FAIL if witnesses else (Verdict.PASS if checked else Verdict.VACUOUS),
        pairs_checked=checked,
        premise_vacuous_count=int(len(i) - checked),
        tolerance=tolerance,
        witnesses=rank_witnesses(witnesses, limit),
        details=details,
    )


def sweep_pairs(condition, mapping, plan, clauses, premise=None, tol=None, limit=MAX_WITNESSES):
    """
    Check lhs <= rhs for every clause on every plan pair whose premise holds.

    The premise is evaluated exactly; the conclusion through the tolerance.
    Chunks run on up to thread_cap() threads and are merged order-independently.

    Args:
        condition: Report name
        mapping: MappingDef
        plan: PairSamplePlan
        clauses: List of (label, fn) with fn(PairBlock) -> (lhs, rhs) arrays
        premise: Optional fn(PairBlock) -> boolean array
        tol: Tolerance
        limit: Maximum witnesses kept

    Returns:
        ConditionReport
    """
    tolerance = tol or Tolerance()
    ctx = build_context(mapping, sample_points(mapping, plan))
    logger.debug("%s: %d chunks over %d points (%s)", condition,
                 chunk_count(plan, len(ctx.points)), len(ctx.points), plan.describe())

    # pair_chunks is consumed lazily; at most pre_dispatch chunks are alive
    partials = Parallel(n_jobs=thread_cap(), prefer='threads', pre_dispatch='2*n_jobs')(
        delayed(_evaluate_chunk)(condition, mapping.space, ctx, i, j, premise, clauses, tolerance, limit)
        for i, j in pair_chunks(plan, len(ctx.points))
    )
    report = merge_reports(partials, limit)
    if report.verdict == Verdict.VACUOUS:
        logger.warning("%s: no sampled pair satisfied the premise", condition)
    return report


def _rsc_premise(b):
    return 0.5 * b.r_x <= b.d_xy


def check_nonexpansive(mapping, plan, tol=None):
    """||Tx - Ty|| <= ||x - y|| on every plan pair."""
    return sweep_pairs(
        'nonexpansive', mapping, plan,
        clauses=[('conclusion', lambda b: (b.d_txty, b.d_xy))],
        tol=tol,
    )


def check_condition_c(mapping, plan, tol=None):
    """(1/2)||x - Tx|| <= ||x - y|| implies ||Tx - Ty|| <= ||x - y||."""
    return sweep_pairs(
        'condition-c', mapping, plan,
        clauses=[('conclusion', lambda b: (b.d_txty, b.d_xy))],
        premise=_rsc_premise,
        tol=tol,
    )


def check_rsc(mapping, plan, tol=None):
    """(1/2)||x - Tx|| <= ||x - y|| implies ||Tx - Ty|| <= (||x - y|| + ||y - Ty|| + ||x - Tx||)/3."""
    return sweep_pairs(
        'rsc', mapping, plan,
        clauses=[('conclusion', lambda b: (b.d_txty, (b.d_xy + b.r_y + b.r_x) / 3.0))],
        premise=_rsc_premise,
        tol=tol,
    )


def verify_fixed_points(mapping, fixed_points, tol=None):
    """
    Points of F(T) to check against, each verified to satisfy ||Tp - p|| <= floor.

    A whole-domain fixed-point set is represented by the domain grid.

    Raises:
        InputError: empty set, or a supplied point that is not fixed
    """
    tolerance = tol or Tolerance()
    if fixed_points is None or fixed_points.empty:
        raise InputError("a nonempty set of fixed points is required")
    if fixed_points.whole_domain:
        return None

    pts = fixed_points.as_array(mapping.dim)
    inside = mapping.domain.contains_many(pts, tol=tolerance.floor)
    if not inside.all():
        bad = pts[int(np.argmin(inside))]
        raise InputError(f"supplied fixed point {bad.tolist()} lies outside the domain")
    residuals = mapping.residuals(pts)
    if np.any(residuals > tolerance.floor):
        k = int(np.argmax(residuals > tolerance.floor))
        raise InputError(
            f"supplied point {pts[k].tolist()} is not a fixed point: ||Tp - p|| = {residuals[k]:.3g}"
        )
    return pts


def check_quasi_nonexpansive(mapping, fixed_points, plan, tol=None):
    """
    ||Tx - p|| <= ||x - p|| for every sampled x and every supplied fixed point p.

    Raises:
        InputError: a supplied point is not fixed
    """
    tolerance = tol or Tolerance()
    pts = verify_fixed_points(mapping, fixed_points, tolerance)
    xs = sample_points(mapping, plan)
    if pts is None:
        pts = xs

    # pairs (x, p) with p drawn from F(T)
    txs = mapping.evaluate_many(xs)
    i = np.repeat(np.arange(len(xs)), len(pts))
    j = np.tile(np.arange(len(pts)), len(xs))
    lhs = norms(mapping.space, txs[i] - pts[j])
    rhs = norms(mapping.space, xs[i] - pts[j])
    bad = tolerance.exceeds(lhs, rhs)

    witnesses = [
        Witness(x=tuple(xs[i[k]].tolist()), y=tuple(pts[j[k]].tolist()),
                lhs=float(lhs[k]), rhs=float(rhs[k]), clause='conclusion')
        for k in np.flatnonzero(bad)
    ]
    witnesses = rank_witnesses(witnesses)
    return ConditionReport(
        condition='quasi-nonexpansive',
        verdict=Verdict.FAIL if witnesses else Verdict.PASS,
        pairs_checked=len(i),
        tolerance=tolerance,
        witnesses=witnesses,
        details={'failing_pairs': int(bad.sum()), 'fixed_points_used': len(pts)},
    )


def classify(mapping, plan, tol=None, fixed_points=None, f=None):
    """
    Run every applicable classifier.

    Args:
        mapping: MappingDef
        plan: PairSamplePlan
        tol: Tolerance
        fixed_points: FixedPointSet (defaults to the mapping's declared set)
        f: Optional ConditionIFunction

    Returns:
        List of ConditionReport in the order nonexpansive, condition-c, rsc,
        quasi-nonexpansive (when F(T) is known), condition-i (when f is given)
    """
    from conditions.inequalities import check_condition_i

    fixed_points = fixed_points if fixed_points is not None else mapping.fixed_points
    reports = [
        check_nonexpansive(mapping, plan, tol),
        check_condition_c(mapping, plan, tol),
        check_rsc(mapping, plan, tol),
    ]
    if fixed_points is not None and not fixed_points.empty:
        reports.append(check_quasi_nonexpansive(mapping, fixed_points, plan, tol))
        if f is not None:
            reports.append(check_condition_i(mapping, fixed_points, f, plan, tol))
    elif f is not None:
        raise InputError("condition (I) needs known fixed points")

    for report in reports:
        logger.info("%s on %s: %s (%d pairs)", report.condition, mapping.name,
                    report.verdict.value, report.pairs_checked)
    return reports
