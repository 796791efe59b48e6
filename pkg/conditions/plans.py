"""
Pair Sample Plans

Which pairs (x, y) of domain points a classifier looks at: every ordered pair
of an axis grid, or a seeded random draw of grid index pairs.
"""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

# Upper bound on pairs evaluated per chunk
CHUNK_PAIRS = 200_000


class PairSamplePlan(BaseModel):
    """Reproducible description of the pairs a classifier checks."""

    model_config = ConfigDict(frozen=True)

    mode: Literal['exhaustive-grid', 'seeded-random'] = 'exhaustive-grid'
    grid_points: PositiveInt = 101
    pair_count: int = Field(default=0, ge=0)
    seed: Optional[int] = None

    @model_validator(mode='after')
    def _check_random(self):
        if self.mode == 'seeded-random':
            if self.seed is None:
                raise ValueError("seeded-random plans need an explicit seed")
            if self.pair_count < 1:
                raise ValueError("seeded-random plans need pair_count >= 1")
        return self

    @classmethod
    def exhaustive(cls, grid_points):
        return cls(mode='exhaustive-grid', grid_points=grid_points)

    @classmethod
    def random(cls, grid_points, pair_count, seed):
        return cls(mode='seeded-random', grid_points=grid_points, pair_count=pair_count, seed=seed)

    def describe(self):
        if self.mode == 'exhaustive-grid':
            return f"exhaustive grid, {self.grid_points} points per axis"
        return f"{self.pair_count} random pairs over a {self.grid_points}-point grid, seed {self.seed}"


def sample_points(mapping, plan):
    """Grid points of the mapping's domain used by plan."""
    return mapping.domain.grid(plan.grid_points)


def pair_chunks(plan, n_points):
    """
    Index pairs (i, j) into the sample points, yielded one chunk at a time.

    Exhaustive plans enumerate all n_points**2 ordered pairs, diagonal
    included. Random plans draw each chunk's i then j from a single
    generator in chunk order, so the pairs do not depend on how chunks are
    scheduled.

    Yields:
        (i, j) integer arrays of at most CHUNK_PAIRS pairs
    """
    if plan.mode == 'exhaustive-grid':
        rows = max(1, CHUNK_PAIRS // max(n_points, 1))
        everything = np.arange(n_points)
        for start in range(0, n_points, rows):
            block = np.arange(start, min(start + rows, n_points))
            yield np.repeat(block, n_points), np.tile(everything, len(block))
        return

    rng = np.random.default_rng(plan.seed)
    for start in range(0, plan.pair_count, CHUNK_PAIRS):
        size = min(CHUNK_PAIRS, plan.pair_count - start)
        i = rng.integers(0, n_points, size=size)
        j = rng.integers(0, n_points, size=size)
        yield i, j


def chunk_count(plan, n_points):
    """Number of chunks pair_chunks yields for plan."""
    if plan.mode == 'exhaustive-grid':
        rows = max(1, CHUNK_PAIRS // max(n_points, 1))
        return -(-n_points // rows)
    return -(-plan.pair_count // CHUNK_PAIRS)
