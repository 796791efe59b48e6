"""
Trajectory Diagnostics

Finite-trace checks of the properties the convergence theory asserts for
Krasnoselskii-Mann iterates of RSC mappings: Fejer monotonicity, existence of
the auxiliary limits h(n) = ||t*x_n + (1-t)*p - q||, the (8/3)-displacement
inequality, demiclosedness of I - T at zero and strong convergence under
condition (I).

Every check returns a PropertyVerdict. "pass" means no violation on the
recorded iterates.
"""

import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from conditions.classifiers import verify_fixed_points
from conditions.inequalities import check_condition_i
from conditions.plans import PairSamplePlan
from errors import InputError
from iterate.mann import relaxed_step
from mapping.model import FixedPointSet
from space.norms import Tolerance, norms
from verdicts import PropertyVerdict, Verdict, not_applicable

logger = logging.getLogger(__name__)

XST1_FACTOR = 8.0 / 3.0
# Exact-recurrence slack relative to 1 + ||x_n||
RECURRENCE_TOL = 1e-15
DEMICLOSED_FACTOR = 10.0
CONDITION_I_GRID = 101


class AuxiliaryLimitProbe(BaseModel):
    """The sequence h(n) = ||t*x_n + (1-t)*p - q|| for fixed points p and q."""

    model_config = ConfigDict(frozen=True)

    t: float = Field(ge=0.0, le=1.0)
    p: Tuple[float, ...]
    q: Tuple[float, ...]

    @classmethod
    def for_mapping(cls, mapping, t, p, q, tol=None):
        """
        Build a probe after checking that p and q are fixed points of mapping.

        Raises:
            InputError: p or q is not fixed
        """
        verify_fixed_points(mapping, FixedPointSet.of(p, q), tol)
        as_tuple = lambda v: tuple(float(c) for c in np.atleast_1d(v))
        return cls(t=t, p=as_tuple(p), q=as_tuple(q))

    def h_values(self, space, iterates):
        p = np.asarray(self.p)
        q = np.asarray(self.q)
        return norms(space, self.t * iterates + (1.0 - self.t) * p - q)


def _reference_points(mapping, points, tol):
    pts = np.asarray(points, dtype=float)
    pts = pts.reshape(-1, mapping.dim)
    verify_fixed_points(mapping, FixedPointSet.of(*pts), tol)
    return pts


def _first(bad, indices):
    return int(indices[int(np.argmax(bad))]) if np.any(bad) else None


def check_recurrence(trace, mapping):
    """
    Every recorded step n -> n+1 reproduces alpha*T x_n + (1-alpha)*x_n to
    within 1e-15*(1 + ||x_n||).
    """
    tolerance = Tolerance(rel=0.0, floor=0.0)
    steps = np.flatnonzero(np.diff(trace.indices) == 1)
    if not len(steps):
        return not_applicable('recurrence', "no consecutive iterates recorded", tolerance)

    x = trace.iterates[steps]
    expected = relaxed_step(mapping, trace.alpha, x)
    gap = norms(mapping.space, trace.iterates[steps + 1] - expected)
    allowed = RECURRENCE_TOL * (1.0 + norms(mapping.space, x))
    bad = gap > allowed
    return PropertyVerdict(
        name='recurrence',
        verdict=Verdict.FAIL if bad.any() else Verdict.PASS,
        checked=len(steps),
        first_violation=_first(bad, trace.indices[steps + 1]),
        tolerance=tolerance,
        details={'max_gap': float(gap.max())},
    )


def check_fejer(trace, mapping, q, tol=None):
    """
    ||x_{n+1} - q|| <= ||x_n - q|| along the trace, for one or several q.

    Args:
        trace: IterationTrace
        mapping: MappingDef the trace was produced with
        q: A fixed point, or an (k, d) array of fixed points
        tol: Tolerance

    Raises:
        InputError: some q is not a fixed point
    """
    tolerance = tol or Tolerance()
    qs = _reference_points(mapping, q, tolerance)

    # distances[k, j] = ||x_{n_k} - q_j||
    dist = norms(mapping.space, trace.iterates[:, None, :] - qs[None, :, :])
    bad = tolerance.exceeds(dist[1:], dist[:-1]).any(axis=1) if len(trace) > 1 else np.zeros(0, bool)
    return PropertyVerdict(
        name='fejer',
        verdict=Verdict.FAIL if bad.any() else Verdict.PASS,
        checked=len(bad) * len(qs),
        first_violation=_first(bad, trace.indices[1:]),
        tolerance=tolerance,
        details={'reference_points': len(qs), 'final_distance': float(dist[-1].max())},
    )


def check_auxiliary_limit(trace, mapping, probe, tail_window, osc_tol):
    """
    The tail of h(n) oscillates by less than osc_tol.

    Needs residuals tending to zero, read as: final residual below osc_tol.

    Raises:
        InputError: trace shorter than tail_window, or invalid window/tolerance
    """
    if tail_window < 1 or not osc_tol > 0.0:
        raise InputError("tail window must be positive and osc_tol > 0")
    if len(trace) < tail_window:
        raise InputError(
            f"trace has {len(trace)} recorded iterates, shorter than the tail window {tail_window}"
        )
    tolerance = Tolerance(rel=0.0, floor=osc_tol)
    name = 'auxiliary-limit'
    if trace.final_residual >= osc_tol:
        return not_applicable(name, f"residual {trace.final_residual:.3g} has not decayed below {osc_tol:g}",
                              tolerance, t=probe.t)

    h = probe.h_values(mapping.space, trace.iterates[-tail_window:])
    oscillation = float(h.max() - h.min())
    return PropertyVerdict(
        name=name,
        verdict=Verdict.PASS if oscillation < osc_tol else Verdict.FAIL,
        checked=tail_window,
        tolerance=tolerance,
        details={'t': probe.t, 'oscillation': oscillation, 'tail_mean': float(h.mean())},
    )


def check_xst1(trace, mapping, probe_t, p, ell_max, tol=None, tail=None, full_sweep=False):
    """
    ||x_{n+1} - S^{l+1} z|| <= ||x_n - S^l z|| + (8/3)||x_n - T x_n||
    with z = t*x_m + (1-t)*p and S the averaged operator of the run.

    Only n = m is checked unless full_sweep, which covers every (m, n) pair
    of the window. Triples whose premise (1/2)||x_n - T x_n|| <= ||x_n - S^l z||
    fails are skipped and counted.

    Args:
        trace: IterationTrace
        mapping: MappingDef
        probe_t: t in [0, 1]
        p: Fixed point
        ell_max: Largest l checked
        tol: Tolerance
        tail: Number of final iterates checked (default all)
        full_sweep: Check all (m, n) instead of the diagonal

    Raises:
        InputError: p is not a fixed point
    """
    tolerance = tol or Tolerance()
    if not 0.0 <= probe_t <= 1.0 or ell_max < 0:
        raise InputError("xst1 needs t in [0, 1] and ell_max >= 0")
    pt = _reference_points(mapping, p, tolerance)[0]

    start = 0 if tail is None else max(0, len(trace) - tail)
    x = trace.iterates[start:]
    idx = trace.indices[start:]
    r = trace.residuals[start:]
    x_next = relaxed_step(mapping, trace.alpha, x)

    z = probe_t * x + (1.0 - probe_t) * pt
    checked = skipped = 0
    first = None
    worst = -np.inf
    for ell in range(ell_max + 1):
        z_next = relaxed_step(mapping, trace.alpha, z)
        if full_sweep:
            before = norms(mapping.space, x[:, None, :] - z[None, :, :])
            after = norms(mapping.space, x_next[:, None, :] - z_next[None, :, :])
            slack = XST1_FACTOR * r[:, None]
            premise = 0.5 * r[:, None] <= before
        else:
            before = norms(mapping.space, x - z)
            after = norms(mapping.space, x_next - z_next)
            slack = XST1_FACTOR * r
            premise = 0.5 * r <= before

        rhs = before + slack
        bad = premise & tolerance.exceeds(after, rhs)
        checked += int(premise.sum())
        skipped += int(premise.size - premise.sum())
        if premise.any():
            worst = max(worst, float((after - rhs)[premise].max()))
        if bad.any():
            rows = np.flatnonzero(bad.any(axis=1)) if full_sweep else np.flatnonzero(bad)
            n_bad = int(idx[rows[0]])
            first = n_bad if first is None else min(first, n_bad)
        z = z_next

    return PropertyVerdict(
        name='xst1',
        verdict=Verdict.FAIL if first is not None else (Verdict.PASS if checked else Verdict.VACUOUS),
        checked=checked,
        skipped=skipped,
        first_violation=first,
        tolerance=tolerance,
        details={
            't': probe_t,
            'ell_max': ell_max,
            'full_sweep': full_sweep,
            'max_excess': worst if checked else None,
        },
    )


def check_demiclosed(trace, mapping, tol, tail=1, tolerance=None):
    """
    Finite-dimensional stand-in for demiclosedness of I - T at zero.

    Hypotheses: the final residual is at most tol, and consecutive iterates
    among the last tail entries and the next step S x_N are within tol of
    each other. Then the limit candidate x0 (the final iterate) must satisfy
    ||T x0 - x0|| <= 10*tol. The chain ||T x0 - x0|| <= 7||Ty - y|| + 2||y - x0||
    is also evaluated, under tolerance, for every recorded iterate y;
    violations are counted in the details.
    """
    name = 'demiclosed'
    tolerance = tolerance or Tolerance()
    window = trace.iterates[-max(tail, 1):]
    window = np.vstack([window, relaxed_step(mapping, trace.alpha, trace.final)[None, :]])
    steps = norms(mapping.space, np.diff(window, axis=0))
    if trace.final_residual > tol or steps.max() > tol:
        return not_applicable(
            name, "residuals and steps have not settled below tol", tolerance,
            final_residual=trace.final_residual, max_step=float(steps.max()),
        )

    x0 = trace.final
    limit_residual = float(mapping.residuals(x0[None, :])[0])
    chain_rhs = 7.0 * trace.residuals + 2.0 * norms(mapping.space, trace.iterates - x0)
    chain_bad = tolerance.exceeds(limit_residual, chain_rhs)
    if np.any(chain_bad):
        logger.warning("demiclosed: %d chain violations on %s", int(np.sum(chain_bad)), trace.mapping_name)

    passed = limit_residual <= DEMICLOSED_FACTOR * tol
    return PropertyVerdict(
        name=name,
        verdict=Verdict.PASS if passed else Verdict.FAIL,
        checked=1,
        first_violation=None if passed else trace.iterations,
        tolerance=tolerance,
        details={
            'limit': x0.tolist(),
            'limit_residual': limit_residual,
            'chain_checked': len(chain_rhs),
            'chain_violations': int(np.sum(chain_bad)),
        },
    )


def check_strong_convergence(trace, mapping, fixed_points, f, dist_tol, tol=None, plan=None):
    """
    d(x_N, F(T)) < dist_tol at the final iterate, with d(x_n, F(T)) nonincreasing.

    Gated on check_condition_i(mapping, fixed_points, f) over plan (default an
    exhaustive 101-point grid); when the gate fails the verdict is
    not-applicable.
    """
    name = 'strong-convergence'
    tolerance = tol or Tolerance()
    gate = check_condition_i(mapping, fixed_points, f, plan or PairSamplePlan.exhaustive(CONDITION_I_GRID), tolerance)
    if gate.verdict != Verdict.PASS:
        return not_applicable(name, f"condition (I) verdict is {gate.verdict.value}", tolerance)

    d = fixed_points.distance(mapping.space, trace.iterates)
    bad = tolerance.exceeds(d[1:], d[:-1])
    final = float(d[-1])
    first = _first(bad, trace.indices[1:])
    if first is None and not final < dist_tol:
        first = trace.iterations
    return PropertyVerdict(
        name=name,
        verdict=Verdict.FAIL if first is not None else Verdict.PASS,
        checked=len(d),
        first_violation=first,
        tolerance=tolerance,
        details={'final_distance': final, 'dist_tol': dist_tol, 'iterations': trace.iterations},
    )
