"""
RSCFixpoint Command Line

Subcommands:
- classify: condition reports for a mapping on a pair sample plan
- iterate: Krasnoselskii-Mann trace as CSV
- verify: trajectory properties of a saved trace
- xi, modulus: uniformity estimates
- gallery: list or show registered mappings
- sweep: summary of runs over a grid of starting points and alphas

Exit codes: 0 completed, 1 a verified property failed, 2 input error,
3 internal error.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys

from pydantic import ValidationError

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from cli.manifest import RunManifest, check_mapping_hash, check_norm_exponent, write_manifest
from conditions.classifiers import classify
from conditions.inequalities import ConditionIFunction, estimate_xi, verify_proposition_k
from conditions.plans import PairSamplePlan
from conditions.reports import reports_to_json
from errors import InputError, InternalError
from iterate.diagnostics import (
    AuxiliaryLimitProbe,
    check_auxiliary_limit,
    check_demiclosed,
    check_fejer,
    check_recurrence,
    check_strong_convergence,
    check_xst1,
)
from iterate.mann import IterationConfig, run_iteration, run_sweep
from iterate.traces import read_trace_csv, trace_rows, write_trace_csv
from mapping.gallery import gallery_entry, gallery_list
from mapping.loader import load_mapping
from mapping.model import FixedPointSet
from space.convexity import estimate_modulus
from space.norms import NormSpec, Tolerance
from verdicts import PropertyVerdict, Verdict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PROPERTY_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3

PROPERTY_ALIASES = {
    'fejer': 'fejer',
    'lemma3': 'auxiliary-limit',
    'auxiliary-limit': 'auxiliary-limit',
    'xst1': 'xst1',
    'demiclosed': 'demiclosed',
    'strong': 'strong-convergence',
    'strong-convergence': 'strong-convergence',
    'prop-k': 'prop-k',
    'recurrence': 'recurrence',
}
# Fixed-point grid per axis standing in for F(T) = K
WHOLE_DOMAIN_GRID = 11


def parse_vector(text):
    """'0.5' or '0.2,0.3' -> tuple of floats."""
    try:
        return tuple(float(c) for c in text.split(','))
    except ValueError:
        raise InputError(f"not a vector of numbers: {text!r}") from None


def parse_floats(text):
    return list(parse_vector(text))


def _dumps(data):
    return json.dumps(data, indent=2, sort_keys=True)


def _tolerance(args):
    return Tolerance(rel=args.rel_tol, floor=args.floor)


def _mapping(args):
    source = args.mapping or args.source
    if not source:
        raise InputError("no mapping given; pass a gallery reference or DSL file")
    mapping, digest = load_mapping(source, p=args.p)
    return source, mapping, digest


def _fixed_points(args, mapping):
    if getattr(args, 'fixed_point', None):
        return FixedPointSet.of(*[parse_vector(v) for v in args.fixed_point])
    return mapping.fixed_points


def _reference_points(mapping, fixed_points):
    if fixed_points is None or fixed_points.empty:
        raise InputError(f"no fixed points known for {mapping.name}; pass --fixed-point")
    if fixed_points.whole_domain:
        return mapping.domain.grid(WHOLE_DOMAIN_GRID)
    return fixed_points.as_array(mapping.dim)


def _manifest(args, source=None, digest=None, mapping=None, **extra):
    return RunManifest(
        command=list(args.argv),
        seed=getattr(args, 'seed', None),
        tolerances={'rel': args.rel_tol, 'floor': args.floor},
        mapping_source=source,
        mapping_hash=digest,
        mapping_name=mapping.name if mapping is not None else None,
        norm_p=repr(float(args.p)),
        **extra,
    )


def _emit(args, text, manifest):
    """Primary output to --out (with manifest sidecar) or stdout."""
    if not args.out:
        print(text)
        return
    directory = os.path.dirname(args.out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(args.out, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
        f.write('\n')
    write_manifest(manifest, args.out)


def _csv_text(rows):
    buffer = io.StringIO()
    csv.writer(buffer, lineterminator='\n').writerows(rows)
    return buffer.getvalue().rstrip('\n')


def _plan(args):
    if args.pairs is None:
        return PairSamplePlan.exhaustive(args.grid)
    if args.seed is None:
        raise InputError("--seed is required with --pairs")
    return PairSamplePlan.random(args.grid, args.pairs, args.seed)


def cmd_classify(args):
    source, mapping, digest = _mapping(args)
    f = ConditionIFunction.parse(args.f) if args.f else None
    reports = classify(mapping, _plan(args), _tolerance(args), _fixed_points(args, mapping), f)

    if args.format == 'csv':
        rows = [['condition', 'verdict', 'pairs_checked', 'premise_vacuous_count', 'x', 'y', 'lhs', 'rhs']]
        for r in reports:
            w = r.witnesses[0] if r.witnesses else None
            rows.append([
                r.condition, r.verdict.value, r.pairs_checked, r.premise_vacuous_count,
                ';'.join(map(repr, w.x)) if w else '', ';'.join(map(repr, w.y)) if w else '',
                repr(w.lhs) if w else '', repr(w.rhs) if w else '',
            ])
        text = _csv_text(rows)
    else:
        text = reports_to_json(reports)

    _emit(args, text, _manifest(args, source, digest, mapping))
    return EXIT_OK


def cmd_iterate(args):
    source, mapping, digest = _mapping(args)
    x1 = parse_vector(args.x1) if args.x1 else tuple(mapping.domain.grid(3)[-1])
    config = IterationConfig.create(
        args.alpha, x1, max_iter=args.max_iter, residual_tol=args.tol,
        record_every=args.record_every, allow_any_alpha=args.force,
    )
    trace = run_iteration(mapping, config)
    fixed_points = _fixed_points(args, mapping)
    manifest = _manifest(args, source, digest, mapping, config=config.model_dump(mode='json'),
                         stop_reason=trace.stop_reason)

    if args.out:
        write_trace_csv(trace, args.out, fixed_points, mapping.space, manifest.to_dict())
    else:
        distances = None
        if fixed_points is not None and not fixed_points.empty:
            distances = fixed_points.distance(mapping.space, trace.iterates)
        print(_csv_text(trace_rows(trace, distances)))
    logger.info("%s stopped after %d iterations (%s)", mapping.name, trace.iterations, trace.stop_reason)
    return EXIT_OK


def _as_property(report):
    return PropertyVerdict(
        name=report.condition,
        verdict=report.verdict,
        checked=report.pairs_checked,
        skipped=report.premise_vacuous_count,
        tolerance=report.tolerance,
        details={**report.details, 'witnesses': [w.model_dump(mode='json') for w in report.witnesses]},
    )


def _verify_property(name, args, trace, mapping, fixed_points, tol):
    if name == 'recurrence':
        return [check_recurrence(trace, mapping)]
    if name == 'prop-k':
        return [_as_property(verify_proposition_k(mapping, PairSamplePlan.exhaustive(args.grid), tol))]
    if name == 'demiclosed':
        return [check_demiclosed(trace, mapping, args.demiclosed_tol, tolerance=tol)]

    refs = _reference_points(mapping, fixed_points)
    if name == 'fejer':
        return [check_fejer(trace, mapping, refs, tol)]
    if name == 'auxiliary-limit':
        return [
            check_auxiliary_limit(trace, mapping, AuxiliaryLimitProbe.for_mapping(mapping, t, refs[0], refs[0], tol),
                                  args.window, args.osc_tol)
            for t in parse_floats(args.t_values)
        ]
    if name == 'xst1':
        return [check_xst1(trace, mapping, args.t, refs[0], args.ell_max, tol, full_sweep=args.full_sweep)]
    if name == 'strong-convergence':
        if not args.f:
            raise InputError("strong convergence needs a condition (I) function; pass --f")
        return [check_strong_convergence(trace, mapping, fixed_points, ConditionIFunction.parse(args.f),
                                         args.dist_tol, tol)]
    raise InputError(f"unknown property {name!r}")


def cmd_verify(args):
    source, mapping, digest = _mapping(args)
    trace, trace_manifest = read_trace_csv(args.trace)
    check_mapping_hash(trace_manifest, digest)
    check_norm_exponent(trace_manifest, args.p)

    names = []
    for item in filter(None, (s.strip() for s in args.properties.split(','))):
        if item not in PROPERTY_ALIASES:
            raise InputError(f"unknown property {item!r}; known: {sorted(PROPERTY_ALIASES)}")
        names.append(PROPERTY_ALIASES[item])

    tol = _tolerance(args)
    fixed_points = _fixed_points(args, mapping)
    verdicts = [v for name in names for v in _verify_property(name, args, trace, mapping, fixed_points, tol)]
    bundle = {
        'mapping': mapping.name,
        'trace': os.path.basename(args.trace),
        'verdicts': [v.model_dump(mode='json') for v in verdicts],
    }
    _emit(args, _dumps(bundle), _manifest(args, source, digest, mapping))
    return EXIT_PROPERTY_FAILED if any(v.failed for v in verdicts) else EXIT_OK


def cmd_xi(args):
    source, mapping, digest = _mapping(args)
    estimate = estimate_xi(mapping, args.epsilon, args.t_grid, args.grid, _tolerance(args))
    _emit(args, _dumps(estimate.model_dump(mode='json')), _manifest(args, source, digest, mapping))
    return EXIT_OK


def cmd_modulus(args):
    estimate = estimate_modulus(NormSpec(p=args.p, dim=args.dim), args.epsilon, args.samples, args.seed)
    _emit(args, _dumps(estimate.model_dump(mode='json')), _manifest(args))
    return EXIT_OK


def cmd_gallery(args):
    if args.action == 'list':
        entries = gallery_list(include_test_only=args.all)
        if args.format == 'json':
            print(_dumps([e.summary() for e in entries]))
            return EXIT_OK
        for entry in entries:
            known = ', '.join(f"{k}={'yes' if v else 'no'}" for k, v in entry.known_properties().items())
            print(f"{entry.id:20s} {entry.description}  [{known}]")
        return EXIT_OK

    if not args.id:
        raise InputError("gallery show needs an id")
    entry = gallery_entry(args.id)
    print(_dumps(entry.summary()))
    if entry.has_dsl:
        print()
        print(entry.build().to_dsl())
    return EXIT_OK


def cmd_sweep(args):
    source, mapping, digest = _mapping(args)
    starts = mapping.domain.grid(args.x1_grid)
    alphas = parse_floats(args.alphas)
    traces = run_sweep(mapping, starts, alphas, max_iter=args.max_iter, residual_tol=args.tol,
                       allow_any_alpha=args.force)

    fixed_points = _fixed_points(args, mapping)
    refs = None
    if fixed_points is not None and not fixed_points.empty:
        refs = _reference_points(mapping, fixed_points)

    tol = _tolerance(args)
    rows = [[f"x1_{i}" for i in range(mapping.dim)] + ['alpha', 'iterations', 'stop_reason', 'final_residual', 'fejer']]
    for trace in traces:
        fejer = check_fejer(trace, mapping, refs, tol).verdict if refs is not None else Verdict.NOT_APPLICABLE
        rows.append(
            [repr(c) for c in trace.config.x1]
            + [repr(trace.alpha), trace.iterations, trace.stop_reason, format(trace.final_residual, '.17g'), fejer.value]
        )
    _emit(args, _csv_text(rows), _manifest(args, source, digest, mapping))
    return EXIT_OK


def _add_mapping_args(parser):
    parser.add_argument('source', nargs='?', help='gallery:<id>[:k=v,...] or a DSL file')
    parser.add_argument('--mapping', help='Same as the positional source')
    parser.add_argument('--p', type=float, default=2.0, help='lp exponent of the norm (default: 2)')


def _add_common_args(parser):
    parser.add_argument('--rel-tol', type=float, default=Tolerance().rel, help='Relative tolerance (default: 1e-9)')
    parser.add_argument('--floor', type=float, default=Tolerance().floor, help='Absolute floor (default: 1e-12)')
    parser.add_argument('--out', help='Write output to this file (plus a manifest sidecar)')
    parser.add_argument('--verbose', action='store_true', help='Debug logging on stderr')


def build_parser():
    parser = argparse.ArgumentParser(prog='rsc-fixpoint', description='Fixed-point conditions and iterations')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('classify', help='Classify a mapping against operator conditions')
    _add_mapping_args(p)
    _add_common_args(p)
    p.add_argument('--grid', type=int, default=101, help='Grid points per axis (default: 101)')
    p.add_argument('--pairs', type=int, help='Random pair count; selects seeded-random mode')
    p.add_argument('--seed', type=int, help='Seed for random mode (required with --pairs)')
    p.add_argument('--fixed-point', action='append', help='Known fixed point (repeatable)')
    p.add_argument('--f', help="Condition (I) function: 'linear:<k>' or 'table:r:f,...'")
    p.add_argument('--format', choices=['json', 'csv'], default='json')
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser('iterate', help='Run the Krasnoselskii-Mann iteration')
    _add_mapping_args(p)
    _add_common_args(p)
    p.add_argument('--x1', help='Starting point, comma separated (default: a domain corner)')
    p.add_argument('--alpha', type=float, default=0.5, help='Relaxation in [1/2, 1) (default: 0.5)')
    p.add_argument('--max-iter', type=int, default=1000)
    p.add_argument('--tol', type=float, default=0.0, help='Stop when the residual drops to this value')
    p.add_argument('--record-every', type=int, default=1)
    p.add_argument('--force', action='store_true', help='Allow alpha outside [1/2, 1)')
    p.add_argument('--fixed-point', action='append', help='Known fixed point (repeatable)')
    p.add_argument('--format', choices=['csv'], default='csv')
    p.set_defaults(handler=cmd_iterate)

    p = sub.add_parser('verify', help='Verify trajectory properties of a saved trace')
    _add_mapping_args(p)
    _add_common_args(p)
    p.add_argument('--trace', required=True, help='Trace CSV written by iterate --out')
    p.add_argument('--properties', default='fejer', help=f"Comma separated, from {sorted(PROPERTY_ALIASES)}")
    p.add_argument('--fixed-point', action='append', help='Known fixed point (repeatable)')
    p.add_argument('--f', help="Condition (I) function for strong convergence")
    p.add_argument('--grid', type=int, default=101, help='Grid for prop-k (default: 101)')
    p.add_argument('--t', type=float, default=0.5, help='t for xst1 (default: 0.5)')
    p.add_argument('--t-values', default='0,0.25,0.5,0.75,1', help='t values for lemma3')
    p.add_argument('--ell-max', type=int, default=10)
    p.add_argument('--full-sweep', action='store_true', help='xst1 over all (m, n) pairs')
    p.add_argument('--window', type=int, default=100, help='Tail window for lemma3')
    p.add_argument('--osc-tol', type=float, default=1e-8)
    p.add_argument('--dist-tol', type=float, default=1e-8)
    p.add_argument('--demiclosed-tol', type=float, default=1e-10)
    p.add_argument('--format', choices=['json'], default='json')
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser('xi', help='Estimate xi(epsilon)')
    _add_mapping_args(p)
    _add_common_args(p)
    p.add_argument('--epsilon', type=float, required=True)
    p.add_argument('--grid', type=int, default=101)
    p.add_argument('--t-grid', type=int, default=21)
    p.add_argument('--format', choices=['json'], default='json')
    p.set_defaults(handler=cmd_xi)

    p = sub.add_parser('modulus', help='Estimate the modulus of convexity')
    _add_common_args(p)
    p.add_argument('--p', type=float, default=2.0)
    p.add_argument('--dim', type=int, default=2)
    p.add_argument('--epsilon', type=float, required=True)
    p.add_argument('--samples', type=int, default=100_000)
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--format', choices=['json'], default='json')
    p.set_defaults(handler=cmd_modulus)

    p = sub.add_parser('gallery', help='List or show gallery mappings')
    p.add_argument('action', choices=['list', 'show'])
    p.add_argument('id', nargs='?')
    p.add_argument('--all', action='store_true', help='Include test-only entries')
    p.add_argument('--format', choices=['text', 'json'], default='text')
    p.add_argument('--verbose', action='store_true')
    p.set_defaults(handler=cmd_gallery)

    p = sub.add_parser('sweep', help='Iterate over a grid of x1 and several alphas')
    _add_mapping_args(p)
    _add_common_args(p)
    p.add_argument('--x1-grid', type=int, default=9, help='Starting points per axis (default: 9)')
    p.add_argument('--alphas', default='0.5,0.75,0.9')
    p.add_argument('--max-iter', type=int, default=1000)
    p.add_argument('--tol', type=float, default=0.0)
    p.add_argument('--force', action='store_true', help='Allow alpha outside [1/2, 1)')
    p.add_argument('--fixed-point', action='append', help='Known fixed point (repeatable)')
    p.add_argument('--format', choices=['csv'], default='csv')
    p.set_defaults(handler=cmd_sweep)

    return parser


def _describe(exc):
    if isinstance(exc, ValidationError):
        return '; '.join(err['msg'] for err in exc.errors())
    return str(exc)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    try:
        return args.handler(args)
    except (InputError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {_describe(exc)}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
