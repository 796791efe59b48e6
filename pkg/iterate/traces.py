"""
Trace Files

CSV persistence of iteration traces with a JSON manifest sidecar. Floats are
written with 17 significant digits so a reloaded trace is bit-identical.
"""

import csv
import json
import logging
import os

import numpy as np

from errors import InputError
from iterate.mann import IterationConfig, IterationTrace

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = '.manifest.json'


def manifest_path(path):
    return path + MANIFEST_SUFFIX


def _fmt(value):
    return format(float(value), '.17g')


def trace_header(dim, with_distance):
    header = ['n'] + [f"x_{i}" for i in range(dim)] + ['residual']
    if with_distance:
        header.append('dist_to_F')
    return header


def trace_rows(trace, distances=None):
    """Header and string rows of a trace, as written to CSV."""
    rows = [trace_header(trace.iterates.shape[1], distances is not None)]
    for k, n in enumerate(trace.indices):
        row = [str(int(n))] + [_fmt(c) for c in trace.iterates[k]] + [_fmt(trace.residuals[k])]
        if distances is not None:
            row.append(_fmt(distances[k]))
        rows.append(row)
    return rows


def write_trace_csv(trace, path, fixed_points=None, space=None, manifest=None):
    """
    Write a trace CSV and, when given, its manifest sidecar.

    Args:
        trace: IterationTrace
        path: Destination CSV file
        fixed_points: Optional FixedPointSet; adds the dist_to_F column
        space: NormSpec used for dist_to_F
        manifest: Optional dict written to <path>.manifest.json
    """
    distances = None
    if fixed_points is not None and not fixed_points.empty:
        distances = fixed_points.distance(space, trace.iterates)

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, 'w', encoding='utf-8', newline='') as f:
        csv.writer(f, lineterminator='\n').writerows(trace_rows(trace, distances))

    if manifest is not None:
        with open(manifest_path(path), 'w', encoding='utf-8') as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write('\n')

    logger.info("Trace saved to: %s", path)


def read_manifest(path):
    """Manifest sidecar of a CSV file, or None if it does not exist."""
    sidecar = manifest_path(path)
    if not os.path.exists(sidecar):
        return None
    with open(sidecar, 'r', encoding='utf-8') as f:
        return json.load(f)


def read_trace_csv(path):
    """
    Load a trace written by write_trace_csv.

    The iteration config is taken from the manifest sidecar, which must exist.

    Returns:
        Tuple of (IterationTrace, manifest dict)

    Raises:
        FileNotFoundError: missing CSV
        InputError: malformed CSV or missing manifest
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Trace file not found: {path}")
    manifest = read_manifest(path)
    if manifest is None or 'config' not in manifest:
        raise InputError(f"trace {path} has no manifest with an iteration config")

    with open(path, 'r', encoding='utf-8', newline='') as f:
        rows = list(csv.reader(f))
    if len(rows) < 2:
        raise InputError(f"trace {path} has no iterates")

    header = rows[0]
    coords = [i for i, name in enumerate(header) if name.startswith('x_')]
    if header[0] != 'n' or not coords or 'residual' not in header:
        raise InputError(f"trace {path} has an unexpected header: {','.join(header)}")
    res_col = header.index('residual')

    try:
        indices = np.array([int(r[0]) for r in rows[1:]], dtype=int)
        iterates = np.array([[float(r[i]) for i in coords] for r in rows[1:]], dtype=float)
        residuals = np.array([float(r[res_col]) for r in rows[1:]], dtype=float)
    except (ValueError, IndexError) as exc:
        raise InputError(f"trace {path} is malformed: {exc}") from None

    config = IterationConfig.model_validate(manifest['config'])
    last = int(indices[-1])
    stop = 'max_iter' if last >= config.max_iter and residuals[-1] > config.residual_tol else 'residual_tol'
    trace = IterationTrace(
        mapping_name=manifest.get('mapping_name', os.path.basename(path)),
        config=config,
        indices=indices,
        iterates=iterates,
        residuals=residuals,
        stop_reason=manifest.get('stop_reason', stop),
    )
    return trace, manifest
