"""
Krasnoselskii-Mann Iteration

Runs x_{n+1} = alpha*T(x_n) + (1 - alpha)*x_n, i.e. iterates the averaged
operator S = alpha*T + (1 - alpha)*I whose fixed points are those of T.
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Literal, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from config import thread_cap
from errors import InputError, InternalError
from space.norms import norms

logger = logging.getLogger(__name__)

ALPHA_RANGE = "[1/2, 1)"
# Slack allowed when asserting that an iterate stayed in the domain
ESCAPE_TOL = 1e-12


class IterationConfig(BaseModel):
    """
    Parameters of one run.

    alpha must lie in [1/2, 1) unless allow_any_alpha is set, in which case
    any alpha in (0, 1] is accepted.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float
    x1: Tuple[float, ...]
    max_iter: PositiveInt = 1000
    residual_tol: float = Field(default=0.0, ge=0.0)
    record_every: PositiveInt = 1
    allow_any_alpha: bool = False

    @model_validator(mode='after')
    def _check_alpha(self):
        if self.allow_any_alpha:
            if not 0.0 < self.alpha <= 1.0:
                raise ValueError(f"alpha must lie in (0, 1] even with the override, got {self.alpha}")
        elif not 0.5 <= self.alpha < 1.0:
            raise ValueError(
                f"alpha must lie in the valid range {ALPHA_RANGE}, got {self.alpha}; "
                "pass the override to explore other values"
            )
        return self

    @classmethod
    def create(cls, alpha, x1, **kwargs):
        return cls(alpha=alpha, x1=tuple(float(c) for c in np.atleast_1d(x1)), **kwargs)


@dataclass(frozen=True)
class IterationTrace:
    """
    Recorded iterates of one run.

    indices[k] is the iteration number n of iterates[k]; residuals[k] is
    ||T x_n - x_n||. The final iterate is always recorded.
    """

    mapping_name: str
    config: IterationConfig
    indices: np.ndarray
    iterates: np.ndarray
    residuals: np.ndarray
    stop_reason: Literal['residual_tol', 'max_iter']

    def __len__(self):
        return len(self.indices)

    @property
    def alpha(self):
        return self.config.alpha

    @property
    def final(self):
        return self.iterates[-1]

    @property
    def final_residual(self):
        return float(self.residuals[-1])

    @property
    def iterations(self):
        return int(self.indices[-1])


def relaxed_step(mapping, alpha, x):
    """
    S x = alpha*T x + (1 - alpha)*x, row-wise for an (N, d) array.

    Args:
        mapping: MappingDef
        alpha: Relaxation parameter
        x: Point or array of points

    Returns:
        Array with the shape of x
    """
    arr = np.asarray(x, dtype=float)
    pts = arr.reshape(-1, mapping.dim)
    out = alpha * mapping.evaluate_many(pts) + (1.0 - alpha) * pts
    return out.reshape(arr.shape)


def run_iteration(mapping, config):
    """
    Iterate S from config.x1 until the residual drops to residual_tol or
    max_iter iterates have been produced.

    Raises:
        InputError: x1 outside the domain or of the wrong dimension
        InternalError: an iterate left the domain
    """
    x = np.asarray(config.x1, dtype=float)
    if x.shape != (mapping.dim,):
        raise InputError(f"x1 must have {mapping.dim} coordinate(s), got {len(config.x1)}")
    if not mapping.domain.contains(x):
        raise InputError(f"x1 = {list(config.x1)} lies outside the domain {mapping.domain.describe()}")

    indices, iterates, residuals = [], [], []
    n = 1
    while True:
        image = mapping.evaluate_many(x[None, :])[0]
        residual = float(norms(mapping.space, image - x))
        stop = None
        if residual <= config.residual_tol:
            stop = 'residual_tol'
        elif n >= config.max_iter:
            stop = 'max_iter'

        if stop or (n - 1) % config.record_every == 0:
            indices.append(n)
            iterates.append(x)
            residuals.append(residual)
        if stop:
            break

        x = config.alpha * image + (1.0 - config.alpha) * x
        slack = ESCAPE_TOL * (1.0 + float(np.max(np.abs(x))))
        if not mapping.domain.contains(x, tol=slack):
            raise InternalError(
                f"iterate {n + 1} of {mapping.name} left the domain: {x.tolist()}"
            )
        n += 1

    logger.debug("%s: %d iterations, stop %s, residual %.3g", mapping.name, n, stop, residual)
    return IterationTrace(
        mapping_name=mapping.name,
        config=config,
        indices=np.asarray(indices, dtype=int),
        iterates=np.asarray(iterates, dtype=float),
        residuals=np.asarray(residuals, dtype=float),
        stop_reason=stop,
    )


def run_sweep(mapping, starts, alphas, max_iter=1000, residual_tol=0.0, record_every=1,
              allow_any_alpha=False):
    """
    One trace per (x1, alpha), x1 varying slowest.

    Runs are independent and execute on up to thread_cap() threads; the
    result is returned in input order.

    Args:
        mapping: MappingDef
        starts: Sequence of starting points
        alphas: Sequence of relaxation parameters
        max_iter: Iteration cap per run
        residual_tol: Stopping residual
        record_every: Recording stride
        allow_any_alpha: Accept alpha outside [1/2, 1)

    Returns:
        List of IterationTrace
    """
    configs = [
        IterationConfig.create(
            alpha, x1, max_iter=max_iter, residual_tol=residual_tol,
            record_every=record_every, allow_any_alpha=allow_any_alpha,
        )
        for x1, alpha in product(starts, alphas)
    ]
    logger.info("Sweeping %d configurations of %s", len(configs), mapping.name)
    return Parallel(n_jobs=thread_cap(), prefer='threads')(
        delayed(run_iteration)(mapping, config) for config in configs
    )
