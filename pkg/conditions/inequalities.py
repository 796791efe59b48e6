"""
Standing Inequalities

Verifiers for the inequalities the convergence theory rests on: the two
displacement bounds satisfied by every RSC mapping, the Senter-Dotson
condition (I), and an empirical estimate of the uniformity constant xi(eps)
(small residuals at u and v force a small residual on the segment [u, v]).
"""

import logging
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from conditions.classifiers import check_rsc, sweep_pairs, verify_fixed_points
from conditions.plans import PairSamplePlan, sample_points
from conditions.reports import ConditionReport, Witness, rank_witnesses
from errors import InputError
from space.norms import Tolerance, norms
from verdicts import Verdict

logger = logging.getLogger(__name__)

RSC_GATE = (Verdict.PASS, Verdict.VACUOUS)
XI_CHUNK = 100_000


class ConditionIFunction(BaseModel):
    """
    Nondecreasing f with f(0) = 0 and f(r) > 0 for r > 0.

    Either linear (f(r) = k*r, k > 0) or a table of (r, f(r)) points starting
    at (0, 0), interpolated linearly and held constant past the last point.
    """

    model_config = ConfigDict(frozen=True)

    form: Literal['linear', 'table'] = 'linear'
    k: Optional[float] = None
    table: Optional[Tuple[Tuple[float, float], ...]] = None

    @model_validator(mode='after')
    def _check_shape(self):
        if self.form == 'linear':
            if self.k is None or not self.k > 0.0:
                raise ValueError(f"linear condition (I) function needs k > 0, got {self.k}")
            return self

        if not self.table:
            raise ValueError("table condition (I) function needs at least one point")
        rs = [r for r, _ in self.table]
        fs = [v for _, v in self.table]
        if rs[0] != 0.0 or fs[0] != 0.0:
            raise ValueError("table must start at (0, 0) so that f(0) = 0")
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("table radii must be strictly increasing")
        if any(b < a for a, b in zip(fs, fs[1:])):
            raise ValueError("table values must be nondecreasing")
        if any(v <= 0.0 for v in fs[1:]):
            raise ValueError("f(r) must be positive for r > 0")
        return self

    @classmethod
    def linear(cls, k):
        return cls(form='linear', k=k)

    @classmethod
    def from_table(cls, points):
        return cls(form='table', table=tuple((float(r), float(v)) for r, v in points))

    @classmethod
    def parse(cls, text):
        """
        Parse 'linear:<k>' or 'table:<r>:<f>,<r>:<f>,...'.

        Raises:
            InputError: malformed text or a function violating its invariants
        """
        kind, _, body = text.partition(':')
        try:
            if kind == 'linear':
                return cls.linear(float(body))
            if kind == 'table':
                points = [tuple(map(float, item.split(':'))) for item in body.split(',') if item]
                return cls.from_table(points)
        except (ValueError, ValidationError) as exc:
            raise InputError(f"invalid condition (I) function {text!r}: {exc}") from None
        raise InputError(f"condition (I) function must be 'linear:<k>' or 'table:...', got {text!r}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.form == 'linear':
            return self.k * r
        rs, fs = zip(*self.table)
        return np.interp(r, rs, fs)


class XiEstimate(BaseModel):
    """Empirical lower estimate of xi(epsilon) on a grid."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan='constants')

    epsilon: float
    xi_hat: float = Field(ge=0.0)
    t_grid: int
    pair_grid: int
    verdict: Verdict
    saturated: bool = False
    points_admitted: int = 0
    reason: Optional[str] = None


def check_condition_i(mapping, fixed_points, f, plan, tol=None):
    """
    ||x - Tx|| >= f(d(x, F(T))) for every sampled x.

    d(x, F(T)) uses only the supplied fixed points.

    Raises:
        InputError: invalid f, or a supplied point that is not fixed
    """
    tolerance = tol or Tolerance()
    if not isinstance(f, ConditionIFunction):
        raise InputError("condition (I) needs a ConditionIFunction")
    pts = verify_fixed_points(mapping, fixed_points, tolerance)

    xs = sample_points(mapping, plan)
    residuals = mapping.residuals(xs)
    if pts is None:
        distances = np.zeros(len(xs))
        nearest = xs
    else:
        gaps = norms(mapping.space, xs[:, None, :] - pts[None, :, :])
        distances = gaps.min(axis=1)
        nearest = pts[gaps.argmin(axis=1)]

    required = f(distances)
    bad = tolerance.exceeds(required, residuals)
    witnesses = rank_witnesses([
        Witness(x=tuple(xs[k].tolist()), y=tuple(nearest[k].tolist()),
                lhs=float(required[k]), rhs=float(residuals[k]), clause='conclusion')
        for k in np.flatnonzero(bad)
    ])
    return ConditionReport(
        condition='condition-i',
        verdict=Verdict.FAIL if witnesses else Verdict.PASS,
        pairs_checked=len(xs),
        tolerance=tolerance,
        witnesses=witnesses,
        details={'failing_pairs': int(bad.sum()), 'max_distance': float(distances.max())},
    )


def verify_proposition_k(mapping, plan, tol=None):
    """
    The displacement bounds of RSC mappings on every plan pair:

        (i)  ||x - Ty|| <= 7||x - Tx|| + ||x - y||
        (ii) ||y - Ty|| <= 7||x - Tx|| + 2||x - y||

    Not applicable unless check_rsc passes on the same plan. Details carry
    the largest observed lhs/rhs ratio per clause.
    """
    tolerance = tol or Tolerance()
    gate = check_rsc(mapping, plan, tolerance)
    if gate.verdict not in RSC_GATE:
        logger.info("proposition-k not applicable to %s: rsc %s", mapping.name, gate.verdict.value)
        return ConditionReport(
            condition='proposition-k',
            verdict=Verdict.NOT_APPLICABLE,
            tolerance=tolerance,
            details={'reason': f"rsc verdict is {gate.verdict.value}"},
        )

    return sweep_pairs(
        'proposition-k', mapping, plan,
        clauses=[
            ('i', lambda b: (b.d_xty, 7.0 * b.r_x + b.d_xy)),
            ('ii', lambda b: (b.r_y, 7.0 * b.r_x + 2.0 * b.d_xy)),
        ],
        tol=tolerance,
    )


def _segment_ok(mapping, points, ts, epsilon):
    """Whether every t*u + (1-t)*v, u, v in points, t in ts, has residual < epsilon."""
    m = len(points)
    if m == 0:
        return True
    per_u = max(1, XI_CHUNK // max(m * len(ts), 1))
    for start in range(0, m, per_u):
        u = points[start:start + per_u]
        z = ts[None, None, :, None] * u[:, None, None, :] + (1.0 - ts)[None, None, :, None] * points[None, :, None, :]
        z = z.reshape(-1, points.shape[1])
        if not np.all(mapping.residuals(z) < epsilon):
            return False
    return True


def estimate_xi(mapping, epsilon, t_grid=21, pair_grid=101, tol=None):
    """
    Largest xi (on the grid) such that ||Tu - u|| < xi and ||Tv - v|| < xi imply
    ||T z - z|| < epsilon for every z = t*u + (1-t)*v, t on a uniform grid.

    Bisection runs over the distinct residual levels of the grid points, so the
    admitted point set changes exactly at the candidates. When every point is
    admissible the estimate saturates at the domain diameter. Not applicable
    unless the mapping passes check_rsc on the exhaustive pair_grid plan.

    Args:
        mapping: MappingDef
        epsilon: Target residual bound, > 0
        t_grid: Number of t values in [0, 1]
        pair_grid: Grid points per axis for u and v
        tol: Tolerance used by the RSC gate

    Returns:
        XiEstimate
    """
    if not epsilon > 0.0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if t_grid < 2:
        raise InputError(f"t_grid needs at least 2 points, got {t_grid}")

    plan = PairSamplePlan.exhaustive(pair_grid)
    gate = check_rsc(mapping, plan, tol)
    if gate.verdict not in RSC_GATE:
        return XiEstimate(epsilon=epsilon, xi_hat=0.0, t_grid=t_grid, pair_grid=pair_grid,
                          verdict=Verdict.NOT_APPLICABLE, reason=f"rsc verdict is {gate.verdict.value}")

    points = sample_points(mapping, plan)
    residuals = mapping.residuals(points)
    ts = np.linspace(0.0, 1.0, t_grid)
    levels = np.unique(residuals)

    def admissible(j):
        if j >= len(levels):
            return _segment_ok(mapping, points, ts, epsilon)
        return _segment_ok(mapping, points[residuals < levels[j]], ts, epsilon)

    # admissible(0) holds vacuously; find the last admissible index
    lo, hi = 0, len(levels)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if admissible(mid):
            lo = mid
        else:
            hi = mid - 1

    saturated = lo == len(levels)
    if saturated:
        xi_hat = max(mapping.domain.diameter(mapping.space), float(levels[-1]))
        admitted = len(points)
    else:
        xi_hat = float(levels[lo])
        admitted = int((residuals < levels[lo]).sum())

    logger.info("xi(%g) for %s: %g (%d of %d points admitted)", epsilon, mapping.name,
                xi_hat, admitted, len(points))
    return XiEstimate(
        epsilon=epsilon,
        xi_hat=xi_hat,
        t_grid=t_grid,
        pair_grid=pair_grid,
        verdict=Verdict.PASS,
        saturated=saturated,
        points_admitted=admitted,
    )
