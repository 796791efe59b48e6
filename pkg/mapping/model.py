"""
Mapping Definitions

A MappingDef is a deterministic self-map T of a DomainSet, carried together
with the norm of the ambient space and, when known, its fixed-point set.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from errors import InputError, MappingValidationError
from space.domains import DomainSet
from space.norms import NormSpec, norms

logger = logging.getLogger(__name__)

# Points per axis used when validating the self-map property at load time
VALIDATION_GRID = {1: 1001, 2: 101}
DEFAULT_VALIDATION_GRID = 11


class FixedPointSet(BaseModel):
    """Known fixed points of a mapping; whole_domain marks F(T) = K."""

    model_config = ConfigDict(frozen=True)

    points: Tuple[Tuple[float, ...], ...] = ()
    whole_domain: bool = False

    @classmethod
    def of(cls, *points):
        return cls(points=tuple(tuple(float(c) for c in np.atleast_1d(p)) for p in points))

    @property
    def empty(self):
        return not self.points and not self.whole_domain

    def as_array(self, dim):
        if not self.points:
            return np.zeros((0, dim))
        return np.asarray(self.points, dtype=float)

    def distance(self, space, points):
        """
        d(x, F(T)) for each row of points, using only the known fixed points.

        Args:
            space: NormSpec
            points: Array of shape (N, dim)

        Returns:
            Array of shape (N,)
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.whole_domain:
            return np.zeros(len(pts))
        if not self.points:
            raise InputError("distance to an empty fixed-point set is undefined")
        fixed = self.as_array(space.dim)
        gaps = norms(space, pts[:, None, :] - fixed[None, :, :])
        return gaps.min(axis=1)


@dataclass(frozen=True)
class MappingDef:
    """
    A self-map T of a domain K.

    func maps an (N, d) array of points to the (N, d) array of their images.
    pieces holds the piecewise-affine AST when the mapping came from the DSL.
    """

    name: str
    domain: DomainSet
    func: Callable[[np.ndarray], np.ndarray]
    space: NormSpec
    fixed_points: Optional[FixedPointSet] = None
    pieces: Optional[Tuple[Any, ...]] = None
    gallery_id: Optional[str] = None
    params: Dict[str, float] = field(default_factory=dict)
    validated: bool = False

    @classmethod
    def create(cls, name, domain, func, p=2.0, fixed_points=None, pieces=None,
               gallery_id=None, params=None, validate=True):
        """
        Build a mapping and, unless told otherwise, check that it maps K into K.

        Raises:
            MappingValidationError: some grid point is mapped outside the domain
        """
        mapping = cls(
            name=name,
            domain=domain,
            func=func,
            space=NormSpec(p=p, dim=domain.dim),
            fixed_points=fixed_points,
            pieces=pieces,
            gallery_id=gallery_id,
            params=dict(params or {}),
        )
        if not validate:
            logger.debug("Mapping %s built without self-map validation", name)
            return mapping

        n = VALIDATION_GRID.get(domain.dim, DEFAULT_VALIDATION_GRID)
        validate_self_map(mapping, n)
        return replace(mapping, validated=True)

    @property
    def dim(self):
        return self.domain.dim

    def with_norm(self, p):
        """Same mapping measured in another lp norm."""
        return replace(self, space=NormSpec(p=p, dim=self.dim))

    def evaluate_many(self, points):
        """
        Vectorized T.

        Args:
            points: Array of shape (N, dim); rows are assumed to lie in the domain

        Returns:
            Array of shape (N, dim)
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.dim:
            raise InputError(f"dimension mismatch: mapping acts on R^{self.dim}, got {pts.shape[-1]}")
        return np.asarray(self.func(pts), dtype=float).reshape(pts.shape)

    def evaluate(self, x):
        """
        Tx for a single point x of the domain.

        Raises:
            InputError: x lies outside the domain
        """
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.domain.contains(arr):
            raise InputError(f"point {arr.tolist()} lies outside the domain {self.domain.describe()}")
        return self.evaluate_many(arr[None, :])[0]

    def residuals(self, points):
        """||Tx - x|| for each row of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return norms(self.space, self.evaluate_many(pts) - pts)

    def to_dsl(self):
        """DSL text for piecewise mappings (see mapping.dsl)."""
        if self.pieces is None:
            raise InputError(f"mapping {self.name} has no piecewise-affine form")
        from mapping.dsl import format_mapping
        return format_mapping(self.domain, self.pieces)


def validate_self_map(mapping, n):
    """
    Check contains(T(x)) for every point of the domain's n-per-axis grid.

    Raises:
        MappingValidationError: with the first escaping point
    """
    grid = mapping.domain.grid(n)
    images = mapping.evaluate_many(grid)
    inside = mapping.domain.contains_many(images) & np.all(np.isfinite(images), axis=-1)
    if not inside.all():
        i = int(np.argmin(inside))
        raise MappingValidationError(
            f"mapping {mapping.name} sends {grid[i].tolist()} to {images[i].tolist()}, "
            f"outside {mapping.domain.describe()}"
        )
    return True
