import numpy as np
import pytest

from conditions.inequalities import ConditionIFunction
from errors import InputError
from iterate.diagnostics import (
    AuxiliaryLimitProbe,
    check_auxiliary_limit,
    check_demiclosed,
    check_fejer,
    check_recurrence,
    check_strong_convergence,
    check_xst1,
)
from iterate.fixed_points import find_fixed_points
from iterate.mann import IterationConfig, relaxed_step, run_iteration, run_sweep
from iterate.traces import read_trace_csv, write_trace_csv
from mapping.gallery import gallery_get, gallery_list
from mapping.model import FixedPointSet
from space.norms import Tolerance
from verdicts import Verdict


def run(gallery_id, alpha=0.5, x1=1.0, **kwargs):
    mapping = gallery_get(gallery_id)
    return mapping, run_iteration(mapping, IterationConfig.create(alpha, x1, **kwargs))


def reference_points(mapping):
    if mapping.fixed_points.whole_domain:
        return mapping.domain.grid(11)
    return mapping.fixed_points.as_array(mapping.dim)


def test_halving_closed_form():
    _, trace = run('halving', max_iter=50)
    np.testing.assert_allclose(trace.iterates[:, 0], 0.75 ** np.arange(50), rtol=0, atol=1e-12)
    assert trace.iterates[3, 0] == 0.421875
    assert trace.stop_reason == 'max_iter'
    assert list(trace.indices) == list(range(1, 51))


def test_constant_map_trajectory():
    _, trace = run('constant', max_iter=3)
    assert trace.iterates[1, 0] == pytest.approx(0.65)
    assert trace.iterates[2, 0] == pytest.approx(0.475)


def test_identity_stops_immediately():
    _, trace = run('identity', x1=0.3, residual_tol=1e-9)
    assert trace.stop_reason == 'residual_tol'
    assert trace.iterations == 1
    assert trace.final_residual == 0.0


def test_alpha_outside_range_rejected():
    with pytest.raises(ValueError) as exc:
        IterationConfig.create(0.2, 1.0)
    assert '[1/2, 1)' in str(exc.value)


def test_alpha_override():
    _, trace = run('halving', alpha=0.2, max_iter=5, allow_any_alpha=True)
    assert trace.iterates[1, 0] == pytest.approx(0.9)


def test_start_outside_domain():
    with pytest.raises(InputError):
        run('halving', x1=2.0)


def test_record_every_keeps_final():
    _, trace = run('halving', max_iter=10, record_every=4)
    assert list(trace.indices) == [1, 5, 9, 10]


def test_relaxed_step_matches_recurrence():
    mapping, trace = run('affine-contraction', max_iter=20)
    assert check_recurrence(trace, mapping).verdict == Verdict.PASS
    np.testing.assert_array_equal(relaxed_step(mapping, 0.5, trace.iterates[:-1]), trace.iterates[1:])


def test_sweep_order_and_count():
    mapping = gallery_get('halving')
    traces = run_sweep(mapping, [[0.0], [1.0]], [0.5, 0.9], max_iter=10)
    assert [(t.config.x1, t.alpha) for t in traces] == [((0.0,), 0.5), ((0.0,), 0.9), ((1.0,), 0.5), ((1.0,), 0.9)]


def test_fejer_suite():
    for entry in gallery_list():
        mapping = entry.build()
        starts = mapping.domain.grid(9 if mapping.dim == 1 else 3)
        refs = reference_points(mapping)
        for trace in run_sweep(mapping, starts, [0.5, 0.75, 0.9], max_iter=1000):
            verdict = check_fejer(trace, mapping, refs)
            assert verdict.verdict == Verdict.PASS, (entry.id, trace.config)


def test_fejer_reflection_collapses():
    mapping, trace = run('reflection', x1=0.2)
    assert trace.iterates[1, 0] == 0.5
    assert check_fejer(trace, mapping, [0.5]).verdict == Verdict.PASS


def test_fejer_suzuki_step():
    mapping, trace = run('suzuki-step', x1=2.0, max_iter=100)
    np.testing.assert_allclose(trace.iterates[:, 0], 2.0 * 0.5 ** np.arange(len(trace)))
    assert check_fejer(trace, mapping, [0.0]).verdict == Verdict.PASS


def test_fejer_rejects_non_fixed_point():
    mapping, trace = run('halving', max_iter=10)
    with pytest.raises(InputError):
        check_fejer(trace, mapping, [0.5])


@pytest.mark.parametrize('t', [0.0, 0.25, 0.5, 0.75, 1.0])
def test_auxiliary_limits_halving(t):
    mapping, trace = run('halving', max_iter=1000)
    probe = AuxiliaryLimitProbe.for_mapping(mapping, t, [0.0], [0.0])
    verdict = check_auxiliary_limit(trace, mapping, probe, tail_window=100, osc_tol=1e-8)
    assert verdict.verdict == Verdict.PASS
    assert verdict.details['oscillation'] < 1e-8


def test_auxiliary_limit_degenerate_t():
    mapping, trace = run('reflection', max_iter=5)
    probe = AuxiliaryLimitProbe.for_mapping(mapping, 0.0, [0.5], [0.5])
    verdict = check_auxiliary_limit(trace, mapping, probe, tail_window=2, osc_tol=1e-8)
    assert verdict.details['oscillation'] == 0.0


def test_auxiliary_limit_short_trace():
    mapping, trace = run('halving', max_iter=3)
    probe = AuxiliaryLimitProbe.for_mapping(mapping, 0.5, [0.0], [0.0])
    with pytest.raises(InputError):
        check_auxiliary_limit(trace, mapping, probe, tail_window=50, osc_tol=1e-8)


def test_auxiliary_probe_needs_fixed_points():
    with pytest.raises(InputError):
        AuxiliaryLimitProbe.for_mapping(gallery_get('halving'), 0.5, [0.0], [0.25])


@pytest.mark.parametrize('gallery_id, p', [('halving', 0.0), ('constant', 0.3), ('identity', 0.3)])
def test_xst1_diagonal(gallery_id, p):
    mapping, trace = run(gallery_id, x1=1.0, max_iter=200)
    verdict = check_xst1(trace, mapping, 0.5, [p], ell_max=10)
    assert verdict.verdict == Verdict.PASS
    assert verdict.first_violation is None
    assert verdict.checked > 0


def test_xst1_full_sweep():
    mapping, trace = run('halving', max_iter=40)
    verdict = check_xst1(trace, mapping, 0.5, [0.0], ell_max=3, full_sweep=True)
    assert verdict.verdict == Verdict.PASS
    assert verdict.checked + verdict.skipped == 40 * 40 * 4


@pytest.mark.parametrize('gallery_id', [e.id for e in gallery_list() if e.build().dim == 1])
def test_demiclosed_on_converged_traces(gallery_id):
    mapping = gallery_get(gallery_id)
    x1 = mapping.domain.grid(2)[-1]
    trace = run_iteration(mapping, IterationConfig.create(0.5, x1, max_iter=5000, residual_tol=1e-10))
    assert trace.final_residual <= 1e-10
    verdict = check_demiclosed(trace, mapping, 1e-10)
    assert verdict.verdict == Verdict.PASS
    assert verdict.details['limit_residual'] <= 1e-9


def test_demiclosed_not_applicable_before_convergence():
    mapping, trace = run('halving', max_iter=3)
    assert check_demiclosed(trace, mapping, 1e-10).verdict == Verdict.NOT_APPLICABLE


def test_demiclosed_uses_caller_tolerance():
    mapping = gallery_get('halving')
    trace = run_iteration(mapping, IterationConfig.create(0.5, [1.0], max_iter=5000, residual_tol=1e-12))
    tolerance = Tolerance(rel=1e-6, floor=1e-10)
    verdict = check_demiclosed(trace, mapping, 1e-10, tolerance=tolerance)
    assert verdict.verdict == Verdict.PASS
    assert verdict.tolerance == tolerance
    assert verdict.details['chain_violations'] == 0
    early = check_demiclosed(trace, mapping, 1e-30, tolerance=tolerance)
    assert early.verdict == Verdict.NOT_APPLICABLE
    assert early.tolerance == tolerance


@pytest.mark.parametrize('alpha', [0.5, 0.75, 0.9])
def test_strong_convergence_halving(alpha):
    mapping, trace = run('halving', alpha=alpha, max_iter=200)
    verdict = check_strong_convergence(trace, mapping, FixedPointSet.of(0.0), ConditionIFunction.linear(0.5), 1e-8)
    assert verdict.verdict == Verdict.PASS
    assert verdict.details['final_distance'] < 1e-8


def test_strong_convergence_affine_contraction():
    mapping, trace = run('affine-contraction', max_iter=400)
    verdict = check_strong_convergence(trace, mapping, FixedPointSet.of(0.5), ConditionIFunction.linear(0.1), 1e-8)
    assert verdict.verdict == Verdict.PASS


def test_strong_convergence_reflection():
    mapping, trace = run('reflection', x1=0.2)
    verdict = check_strong_convergence(trace, mapping, FixedPointSet.of(0.5), ConditionIFunction.linear(1.0), 1e-8)
    assert verdict.verdict == Verdict.PASS


def test_strong_convergence_gated_on_condition_i():
    mapping, trace = run('halving', max_iter=200)
    verdict = check_strong_convergence(trace, mapping, FixedPointSet.of(0.0), ConditionIFunction.linear(1.0), 1e-8)
    assert verdict.verdict == Verdict.NOT_APPLICABLE


def test_strong_convergence_too_few_iterations():
    mapping, trace = run('halving', max_iter=10)
    verdict = check_strong_convergence(trace, mapping, FixedPointSet.of(0.0), ConditionIFunction.linear(0.5), 1e-8)
    assert verdict.verdict == Verdict.FAIL


@pytest.mark.parametrize('gallery_id, expected', [('halving', 0.0), ('reflection', 0.5), ('suzuki-step', 0.0)])
def test_find_fixed_points_line(gallery_id, expected):
    found = find_fixed_points(gallery_get(gallery_id), grid_points=1001)
    assert len(found) == 1
    assert found[0][0] == pytest.approx(expected, abs=1e-12)


def test_find_fixed_points_plane():
    found = find_fixed_points(gallery_get('box-halving'), grid_points=11)
    assert len(found) == 1
    np.testing.assert_allclose(found[0], [0.0, 0.0], atol=1e-12)


@pytest.mark.parametrize('gallery_id', ['affine-contraction', 'reflection', 'constant'])
def test_find_fixed_points_stable_under_refinement(gallery_id):
    mapping = gallery_get(gallery_id)
    coarse = find_fixed_points(mapping, grid_points=1001)
    fine = find_fixed_points(mapping, grid_points=2001)
    assert coarse
    for point in coarse:
        assert min(abs(point[0] - q[0]) for q in fine) <= 1e-12


def test_trace_csv_reload_is_exact(tmp_path):
    mapping, trace = run('affine-contraction', max_iter=30)
    path = str(tmp_path / 'trace.csv')
    write_trace_csv(trace, path, mapping.fixed_points, mapping.space,
                    manifest={'config': trace.config.model_dump(mode='json'), 'mapping_name': mapping.name})
    with open(path, encoding='utf-8') as f:
        assert f.readline().strip() == 'n,x_0,residual,dist_to_F'
    loaded, manifest = read_trace_csv(path)
    np.testing.assert_array_equal(loaded.iterates, trace.iterates)
    np.testing.assert_array_equal(loaded.residuals, trace.residuals)
    assert loaded.config == trace.config
    assert manifest['mapping_name'] == mapping.name


def test_trace_without_manifest_rejected(tmp_path):
    mapping, trace = run('halving', max_iter=5)
    path = str(tmp_path / 'bare.csv')
    write_trace_csv(trace, path)
    with pytest.raises(InputError):
        read_trace_csv(path)
