"""
Uniform Convexity

Finite-sample forms of the uniform-convexity facts used by the convergence
theory: an empirical modulus of convexity, and checks of the two sequence
lemmas (||x_n + y_n|| -> 2 forces ||x_n - y_n|| -> 0, and the three-sequence
convex-combination lemma).
"""

import itertools
import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from errors import InputError
from space.norms import NormSpec, Tolerance, norms
from verdicts import PropertyVerdict, Verdict, not_applicable

logger = logging.getLogger(__name__)

NOT_UNIFORMLY_CONVEX = "norm is not uniformly convex (p in {1, inf}); convergence theorems do not apply"

BISECTION_STEPS = 48
MAX_CORNER_DIM = 6


class ModulusEstimate(BaseModel):
    """Sampled estimate of the modulus of convexity at one epsilon."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan='constants')

    epsilon: float
    delta_hat: float = Field(ge=0.0, le=1.0)
    samples: int
    p: float
    dim: int
    seed: int
    pairs_used: int
    uniformly_convex: bool
    consistent: bool
    closed_form: Optional[float] = None
    warnings: List[str] = Field(default_factory=list)


def _normalize(space, points):
    n = norms(space, points)
    n = np.where(n > 0.0, n, 1.0)
    return points / n[:, None]


def _extremal_pairs(space):
    """Axis, antipodal and cube-corner unit pairs, which random sampling tends to miss."""
    d = space.dim
    eye = np.eye(d)
    vectors = [eye, -eye]
    if d <= MAX_CORNER_DIM:
        corners = np.array(list(itertools.product((1.0, -1.0), repeat=d)))
        vectors.append(_normalize(space, corners))
    unit = np.vstack(vectors)
    idx = np.array(list(itertools.product(range(len(unit)), repeat=2)))
    return unit[idx[:, 0]], unit[idx[:, 1]]


def _pull_toward(space, xs, ys, epsilon):
    """
    Slide each y toward its x along the normalized chord while ||x - y|| >= epsilon.

    Pairs whose chord passes through the origin are returned unchanged.
    """
    through_origin = norms(space, xs + ys) < 1e-12
    lo = np.zeros(len(xs))
    hi = np.ones(len(xs))
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        candidate = _normalize(space, (1.0 - mid)[:, None] * ys + mid[:, None] * xs)
        far = norms(space, xs - candidate) >= epsilon
        lo = np.where(far, mid, lo)
        hi = np.where(far, hi, mid)
    lo = np.where(through_origin, 0.0, lo)
    pulled = _normalize(space, (1.0 - lo)[:, None] * ys + lo[:, None] * xs)
    return np.where(through_origin[:, None], ys, pulled)


def estimate_modulus(space, epsilon, samples, seed):
    """
    Estimate delta(epsilon) = 1 - sup{ ||x+y||/2 : ||x|| = ||y|| = 1, ||x-y|| >= epsilon }.

    Args:
        space: NormSpec
        epsilon: Separation, 0 < epsilon <= 2
        samples: Number of random unit pairs
        seed: Seed for the random pairs

    Returns:
        ModulusEstimate; deterministic for a fixed seed
    """
    if not (0.0 < epsilon <= 2.0):
        raise InputError(f"epsilon must lie in (0, 2], got {epsilon}")
    if space.p != 2.0 and space.dim < 2:
        raise InputError("the modulus of a one-dimensional lp space is degenerate; use dim >= 2")
    if samples < 0:
        raise InputError(f"samples must be nonnegative, got {samples}")

    rng = np.random.default_rng(seed)
    xs = _normalize(space, rng.standard_normal((samples, space.dim)))
    ys = _normalize(space, rng.standard_normal((samples, space.dim)))
    ex, ey = _extremal_pairs(space)
    xs = np.vstack([xs, ex])
    ys = np.vstack([ys, ey])

    keep = norms(space, xs - ys) >= epsilon
    xs, ys = xs[keep], ys[keep]
    ratios = norms(space, xs + ys) / 2.0
    pulled = _pull_toward(space, xs, ys, epsilon)
    ratios = np.maximum(ratios, norms(space, xs + pulled) / 2.0)

    best = float(ratios.max()) if len(ratios) else 0.0
    delta_hat = min(1.0, max(0.0, 1.0 - best))

    warnings = []
    if not space.uniformly_convex:
        warnings.append(NOT_UNIFORMLY_CONVEX)
    consistent = delta_hat > 0.0 or not space.uniformly_convex
    if not consistent:
        warnings.append(f"estimated modulus is zero at epsilon={epsilon:g} for a uniformly convex norm")
        logger.warning(warnings[-1])

    closed_form = None
    if space.p == 2.0:
        closed_form = 1.0 - math.sqrt(1.0 - epsilon * epsilon / 4.0)

    return ModulusEstimate(
        epsilon=epsilon,
        delta_hat=delta_hat,
        samples=samples,
        p=space.p,
        dim=space.dim,
        seed=seed,
        pairs_used=int(keep.sum()),
        uniformly_convex=space.uniformly_convex,
        consistent=consistent,
        closed_form=closed_form,
        warnings=warnings,
    )


def separation_bound(p, eta):
    """
    Largest ||x - y|| for unit x, y compatible with ||x + y||/2 >= 1 - eta.

    Inverts a lower estimate of the lp modulus of convexity: exact for p >= 2,
    delta(e) >= (p-1) e^2 / 8 for 1 < p < 2. Capped at 2.
    """
    eta = np.clip(np.asarray(eta, dtype=float), 0.0, 1.0)
    if p >= 2.0:
        bound = 2.0 * (1.0 - (1.0 - eta) ** p) ** (1.0 / p)
    else:
        bound = np.sqrt(8.0 * eta / (p - 1.0))
    return np.minimum(bound, 2.0)


def _tail(arr, tail):
    if tail is None or tail >= len(arr):
        return 0
    if tail < 1:
        raise InputError(f"tail window must be positive, got {tail}")
    return len(arr) - tail


def _as_sequence(space, values, label):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != space.dim:
        raise InputError(f"{label} must be a sequence of vectors of length {space.dim}")
    return arr


def check_kirk_property(space, xs, ys, tol, tail=None, tolerance=None):
    """
    Check that ||x_n|| -> 1, ||y_n|| -> 1, ||x_n + y_n|| -> 2 force ||x_n - y_n|| -> 0.

    On the tail window every element satisfying the hypotheses to within tol
    must satisfy ||x_n - y_n|| <= separation_bound(p, eta_n) plus the norm
    deviations, eta_n being the deficiency of the normalized pair. For p = 2
    that bound is at most 2*sqrt(2*tol).

    Args:
        space: NormSpec
        xs: Sequence of vectors
        ys: Sequence of vectors of equal length
        tol: Hypothesis tolerance
        tail: Tail window length (default: whole sequence)
        tolerance: Tolerance for the conclusion

    Returns:
        PropertyVerdict (pass, fail or not-applicable)
    """
    name = 'kirk'
    tolerance = tolerance or Tolerance()
    x = _as_sequence(space, xs, 'xs')
    y = _as_sequence(space, ys, 'ys')
    if len(x) != len(y) or not len(x):
        raise InputError("xs and ys must be nonempty sequences of equal length")

    if not space.uniformly_convex:
        verdict = not_applicable(name, NOT_UNIFORMLY_CONVEX, tolerance)
        return verdict.model_copy(update={'warnings': [NOT_UNIFORMLY_CONVEX]})

    start = _tail(x, tail)
    x, y = x[start:], y[start:]
    nx, ny, nsum = norms(space, x), norms(space, y), norms(space, x + y)
    hypotheses = (np.abs(nx - 1.0) <= tol) & (np.abs(ny - 1.0) <= tol) & (np.abs(nsum - 2.0) <= tol)
    if not np.all(hypotheses):
        first = int(np.argmin(hypotheses)) + start
        return not_applicable(name, "hypotheses not met on the tail", tolerance, first_unmet=first)

    xh = x / nx[:, None]
    yh = y / ny[:, None]
    eta = np.maximum(0.0, 1.0 - norms(space, xh + yh) / 2.0)
    bound = separation_bound(space.p, eta) + np.abs(nx - 1.0) + np.abs(ny - 1.0)
    gap = norms(space, x - y)
    bad = tolerance.exceeds(gap, bound)

    details = {
        'tail_start': start,
        'max_separation': float(gap.max()),
        'max_bound': float(bound.max()),
    }
    if space.p == 2.0:
        details['nominal_bound'] = 2.0 * math.sqrt(2.0 * tol)

    return PropertyVerdict(
        name=name,
        verdict=Verdict.FAIL if bad.any() else Verdict.PASS,
        checked=len(gap),
        first_violation=int(np.argmax(bad)) + start if bad.any() else None,
        tolerance=tolerance,
        details=details,
    )


def check_ks_property(space, us, vs, ws, t, d, tol, tail=None, conclusion_tol=None, tolerance=None):
    """
    Check the three-sequence lemma: ||u_n - v_n|| -> d, limsup ||u_n - w_n|| <= (1-t)d
    and limsup ||v_n - w_n|| <= td force ||t u_n + (1-t) v_n - w_n|| -> 0.

    For p = 2 the conclusion bound follows from the parallelogram identity
    applied to the hypothesis envelope; for other uniformly convex norms the
    caller's conclusion_tol (default sqrt(tol)) is used.

    Args:
        space: NormSpec
        us, vs, ws: Sequences of vectors of equal length
        t: Weight in (0, 1)
        d: Limit distance, d > 0
        tol: Hypothesis tolerance
        tail: Tail window length (default: whole sequence)
        conclusion_tol: Conclusion bound for p != 2
        tolerance: Tolerance for the conclusion

    Returns:
        PropertyVerdict (pass, fail or not-applicable)
    """
    name = 'ks'
    tolerance = tolerance or Tolerance()
    if not (0.0 < t < 1.0):
        raise InputError(f"t must lie in (0, 1), got {t}")
    if not d > 0.0:
        raise InputError(f"d must be positive, got {d}")

    u = _as_sequence(space, us, 'us')
    v = _as_sequence(space, vs, 'vs')
    w = _as_sequence(space, ws, 'ws')
    if not (len(u) == len(v) == len(w)) or not len(u):
        raise InputError("us, vs and ws must be nonempty sequences of equal length")

    if not space.uniformly_convex:
        verdict = not_applicable(name, NOT_UNIFORMLY_CONVEX, tolerance)
        return verdict.model_copy(update={'warnings': [NOT_UNIFORMLY_CONVEX]})

    start = _tail(u, tail)
    u, v, w = u[start:], v[start:], w[start:]
    hypotheses = (
        (np.abs(norms(space, u - v) - d) <= tol)
        & (norms(space, u - w) <= (1.0 - t) * d + tol)
        & (norms(space, v - w) <= t * d + tol)
    )
    if not np.all(hypotheses):
        first = int(np.argmin(hypotheses)) + start
        return not_applicable(name, "hypotheses not met on the tail", tolerance, first_unmet=first)

    if space.p == 2.0:
        squared = (
            t * ((1.0 - t) * d + tol) ** 2
            + (1.0 - t) * (t * d + tol) ** 2
            - t * (1.0 - t) * max(d - tol, 0.0) ** 2
        )
        bound = math.sqrt(max(squared, 0.0))
    else:
        bound = conclusion_tol if conclusion_tol is not None else math.sqrt(tol)

    gap = norms(space, t * u + (1.0 - t) * v - w)
    bad = tolerance.exceeds(gap, bound)
    return PropertyVerdict(
        name=name,
        verdict=Verdict.FAIL if bad.any() else Verdict.PASS,
        checked=len(gap),
        first_violation=int(np.argmax(bad)) + start if bad.any() else None,
        tolerance=tolerance,
        details={'tail_start': start, 'bound': bound, 'max_gap': float(gap.max())},
    )
