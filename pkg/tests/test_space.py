import math

import numpy as np
import pytest

from errors import InputError
from space.convexity import check_kirk_property, check_ks_property, estimate_modulus, separation_bound
from space.domains import DomainSet
from space.norms import NormSpec, Tolerance, distance, norm_eval, norms
from verdicts import Verdict


def test_norms_exact_exponents():
    v = np.array([3.0, -4.0])
    assert norm_eval(NormSpec(p=1, dim=2), v) == 7.0
    assert norm_eval(NormSpec(p=2, dim=2), v) == 5.0
    assert norm_eval(NormSpec(p=math.inf, dim=2), v) == 4.0
    assert norm_eval(NormSpec(p=3, dim=2), v) == pytest.approx(91.0 ** (1.0 / 3.0))


def test_norms_vectorized_and_zero():
    space = NormSpec(p=4, dim=2)
    out = norms(space, np.array([[0.0, 0.0], [1.0, 0.0], [1e200, 1e200]]))
    assert out[0] == 0.0
    assert out[1] == pytest.approx(1.0)
    assert out[2] == pytest.approx(1e200 * 2.0 ** 0.25)


def test_norm_dimension_mismatch():
    with pytest.raises(InputError):
        norm_eval(NormSpec(p=2, dim=2), [1.0, 2.0, 3.0])


def test_norm_exponent_below_one_rejected():
    with pytest.raises(ValueError):
        NormSpec(p=0.5, dim=1)


def test_distance():
    space = NormSpec(p=2, dim=1)
    assert float(distance(space, [0.25], [1.0])) == 0.75


def test_tolerance_equality_holds():
    tol = Tolerance()
    assert not tol.exceeds(0.5, 0.5)
    assert tol.exceeds(1.0, 1.0 / 3.0)
    assert tol.holds(1e-13, 0.0)
    assert list(tol.exceeds(np.array([1.0, 2.0]), np.array([1.0, 1.0]))) == [False, True]


def test_interval_grid_and_membership():
    domain = DomainSet.interval(0.0, 3.0)
    grid = domain.grid(301)
    assert grid.shape == (301, 1)
    assert grid[0, 0] == 0.0 and grid[-1, 0] == 3.0
    assert domain.contains([3.0])
    assert not domain.contains([3.0 + 1e-9])
    assert domain.diameter(NormSpec(p=2, dim=1)) == 3.0


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        DomainSet.interval(1.0, 0.0)


def test_ball_grid_stays_inside():
    ball = DomainSet.ball((0.0, 0.0), 1.0, p=2.0)
    grid = ball.grid(11)
    assert ball.contains_many(grid).all()
    assert np.any(np.all(grid == 0.0, axis=1))
    assert not ball.contains([0.8, 0.8])
    assert DomainSet.ball((0.0, 0.0), 1.0, p=1.0).contains([0.5, 0.5])


def test_modulus_p2_matches_closed_form():
    estimate = estimate_modulus(NormSpec(p=2, dim=2), 1.0, samples=100_000, seed=1)
    assert abs(estimate.delta_hat - (1.0 - math.sqrt(3.0) / 2.0)) < 1e-3
    assert estimate.closed_form == pytest.approx(0.1339746, abs=1e-7)
    assert estimate.uniformly_convex


def test_modulus_p1_is_zero():
    estimate = estimate_modulus(NormSpec(p=1, dim=2), 1.0, samples=10_000, seed=1)
    assert estimate.delta_hat == pytest.approx(0.0, abs=1e-9)
    assert not estimate.uniformly_convex
    assert estimate.warnings


def test_modulus_deterministic_for_seed():
    space = NormSpec(p=3, dim=2)
    a = estimate_modulus(space, 0.5, samples=5_000, seed=11)
    b = estimate_modulus(space, 0.5, samples=5_000, seed=11)
    assert a == b
    assert 0.0 < a.delta_hat < 1.0


def test_modulus_rejects_bad_epsilon():
    with pytest.raises(InputError):
        estimate_modulus(NormSpec(p=2, dim=2), 2.5, samples=10, seed=0)


def test_separation_bound_p2():
    eta = 0.02
    assert separation_bound(2.0, eta) == pytest.approx(2.0 * math.sqrt(2.0 * eta - eta * eta))


def test_kirk_converging_pairs_pass():
    space = NormSpec(p=2, dim=2)
    angles = np.geomspace(1e-1, 1e-4, 10)
    xs = np.tile([1.0, 0.0], (10, 1))
    ys = np.column_stack([np.cos(angles), np.sin(angles)])
    verdict = check_kirk_property(space, xs, ys, tol=1e-2, tolerance=Tolerance(rel=1e-6))
    assert verdict.verdict == Verdict.PASS
    assert verdict.details['nominal_bound'] == pytest.approx(2.0 * math.sqrt(2e-2))


def test_kirk_not_applicable_for_l1():
    space = NormSpec(p=1, dim=2)
    verdict = check_kirk_property(space, [[1.0, 0.0]], [[0.0, 1.0]], tol=1e-3)
    assert verdict.verdict == Verdict.NOT_APPLICABLE
    assert verdict.warnings


def test_kirk_hypotheses_unmet():
    space = NormSpec(p=2, dim=2)
    verdict = check_kirk_property(space, [[1.0, 0.0]], [[-1.0, 0.0]], tol=1e-3)
    assert verdict.verdict == Verdict.NOT_APPLICABLE


def test_ks_midpoint_passes():
    space = NormSpec(p=2, dim=2)
    us = [[0.0, 0.0]] * 5
    vs = [[1.0, 0.0]] * 5
    ws = [[0.5, 0.0]] * 5
    verdict = check_ks_property(space, us, vs, ws, t=0.5, d=1.0, tol=1e-6)
    assert verdict.verdict == Verdict.PASS
    assert verdict.checked == 5


@pytest.mark.parametrize('p', [1.0, 1.5, 2.0, 3.0, math.inf])
def test_reverse_triangle_on_sampled_pairs(p):
    space = NormSpec(p=p, dim=3)
    rng = np.random.default_rng(5)
    x = rng.standard_normal((2000, 3))
    y = rng.standard_normal((2000, 3))
    tol = Tolerance(rel=1e-12, floor=1e-12)
    assert not tol.exceeds(np.abs(norms(space, x) - norms(space, y)), norms(space, x - y)).any()


@pytest.mark.parametrize('p', [1.0, 1.5, 2.0, 3.0, math.inf])
def test_triangle_and_homogeneity_on_sampled_triples(p):
    space = NormSpec(p=p, dim=3)
    rng = np.random.default_rng(6)
    x, y, z = rng.standard_normal((3, 2000, 3))
    tol = Tolerance(rel=1e-12, floor=1e-12)
    assert not tol.exceeds(norms(space, x - z), norms(space, x - y) + norms(space, y - z)).any()
    s = rng.uniform(-5.0, 5.0, size=2000)
    np.testing.assert_allclose(norms(space, s[:, None] * x), np.abs(s) * norms(space, x), rtol=1e-12)


@pytest.mark.parametrize('domain, n', [
    (DomainSet.interval(-1.0, 3.0), 10_000),
    (DomainSet.box((0.0, -1.0), (1.0, 2.0)), 100),
    (DomainSet.ball((0.5, -0.5), 2.0, p=2.0), 100),
    (DomainSet.ball((0.0, 0.0), 1.0, p=3.0), 100),
])
def test_large_grids_stay_inside(domain, n):
    grid = domain.grid(n)
    assert 0 < len(grid) <= 10_000
    assert domain.contains_many(grid).all()
    np.testing.assert_array_equal(grid, domain.grid(n))


@pytest.mark.parametrize('p', [1.5, 3.0])
@pytest.mark.parametrize('epsilon', [0.25, 0.5, 1.0, 1.5])
def test_modulus_positive_for_uniformly_convex_norms(p, epsilon):
    estimate = estimate_modulus(NormSpec(p=p, dim=2), epsilon, samples=20_000, seed=2)
    assert estimate.delta_hat > 0.0
    assert estimate.consistent
    assert not estimate.warnings


def test_modulus_vanishes_as_epsilon_shrinks():
    estimate = estimate_modulus(NormSpec(p=2, dim=2), 1e-6, samples=1_000, seed=4)
    assert estimate.delta_hat <= 1e-6


def test_modulus_rejects_one_dimensional_non_euclidean():
    with pytest.raises(InputError):
        estimate_modulus(NormSpec(p=3, dim=1), 0.5, samples=10, seed=0)
    assert estimate_modulus(NormSpec(p=2, dim=1), 2.0, samples=10, seed=0).delta_hat == pytest.approx(1.0)


def test_kirk_identical_sequences_pass():
    space = NormSpec(p=2, dim=2)
    e1 = np.tile([1.0, 0.0], (8, 1))
    verdict = check_kirk_property(space, e1, e1, tol=1e-9)
    assert verdict.verdict == Verdict.PASS
    assert verdict.details['max_separation'] == 0.0
