"""
Domain Sets

Bounded closed convex subsets K of R^d: intervals, boxes and lp balls, with
exact membership (interval, box), 1e-12 membership (ball) and deterministic
grid sampling.
"""

import itertools
import math
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from errors import InputError
from space.norms import NormSpec, norms

BALL_MEMBERSHIP_TOL = 1e-12


class DomainSet(BaseModel):
    """
    Nonempty bounded closed convex set K.

    Intervals and boxes are given by lower/upper corner vectors, balls by
    center, radius and the exponent of the norm the ball is taken in.
    """

    model_config = ConfigDict(frozen=True, ser_json_inf_nan='constants')

    kind: Literal['interval', 'box', 'ball']
    lower: Optional[Tuple[float, ...]] = None
    upper: Optional[Tuple[float, ...]] = None
    center: Optional[Tuple[float, ...]] = None
    radius: Optional[float] = None
    p: float = 2.0

    @model_validator(mode='after')
    def _check_shape(self):
        if self.kind in ('interval', 'box'):
            if self.lower is None or self.upper is None:
                raise ValueError(f"{self.kind} needs lower and upper bounds")
            if len(self.lower) != len(self.upper) or not self.lower:
                raise ValueError("lower and upper bounds must have the same positive length")
            if self.kind == 'interval' and len(self.lower) != 1:
                raise ValueError("an interval is one-dimensional; use a box")
            for lo, hi in zip(self.lower, self.upper):
                if not (math.isfinite(lo) and math.isfinite(hi)):
                    raise ValueError("domain bounds must be finite")
                if lo > hi:
                    raise ValueError(f"empty domain: lower bound {lo} exceeds upper bound {hi}")
        else:
            if self.center is None or self.radius is None or not self.center:
                raise ValueError("ball needs a center and a radius")
            if not all(math.isfinite(c) for c in self.center):
                raise ValueError("ball center must be finite")
            if not (math.isfinite(self.radius) and self.radius >= 0.0):
                raise ValueError(f"ball radius must be finite and nonnegative, got {self.radius}")
            if math.isnan(self.p) or self.p < 1.0:
                raise ValueError(f"ball exponent must satisfy 1 <= p <= inf, got {self.p}")
        return self

    @classmethod
    def interval(cls, lower, upper):
        return cls(kind='interval', lower=(float(lower),), upper=(float(upper),))

    @classmethod
    def box(cls, lower, upper):
        return cls(kind='box', lower=tuple(map(float, lower)), upper=tuple(map(float, upper)))

    @classmethod
    def ball(cls, center, radius, p=2.0):
        return cls(kind='ball', center=tuple(map(float, center)), radius=float(radius), p=float(p))

    @property
    def dim(self):
        if self.kind == 'ball':
            return len(self.center)
        return len(self.lower)

    def contains_many(self, points, tol=0.0):
        """
        Vectorized membership test.

        Args:
            points: Array of shape (N, dim)
            tol: Extra slack allowed outside the set

        Returns:
            Boolean array of shape (N,)
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[-1] != self.dim:
            raise InputError(f"dimension mismatch: domain has dimension {self.dim}, got {pts.shape[-1]}")

        if self.kind == 'ball':
            ball_norm = NormSpec(p=self.p, dim=self.dim)
            gaps = norms(ball_norm, pts - np.asarray(self.center))
            return gaps <= self.radius + max(tol, BALL_MEMBERSHIP_TOL)

        lo = np.asarray(self.lower) - tol
        hi = np.asarray(self.upper) + tol
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def contains(self, x, tol=0.0):
        """Membership of a single point."""
        arr = np.asarray(x, dtype=float)
        if arr.ndim != 1:
            raise InputError(f"expected a vector, got an array of shape {arr.shape}")
        return bool(self.contains_many(arr[None, :], tol=tol)[0])

    def bounding_box(self):
        if self.kind == 'ball':
            c = np.asarray(self.center)
            return c - self.radius, c + self.radius
        return np.asarray(self.lower), np.asarray(self.upper)

    def grid(self, n):
        """
        Deterministic grid with n points per axis, restricted to the set.

        Args:
            n: Points per axis (>= 1)

        Returns:
            Array of shape (N, dim); every row satisfies contains
        """
        if n < 1:
            raise InputError(f"grid needs at least one point per axis, got {n}")

        lo, hi = self.bounding_box()
        axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
        if self.dim == 1:
            points = axes[0][:, None]
        else:
            points = np.array(list(itertools.product(*axes)), dtype=float)

        if self.kind == 'ball':
            points = points[self.contains_many(points)]
            center = np.asarray(self.center)[None, :]
            if not np.any(np.all(points == center, axis=-1)):
                points = np.vstack([center, points])
        return points

    def diameter(self, space):
        """
        Upper bound on sup ||x - y|| over the set, measured in space's norm.

        Args:
            space: NormSpec of matching dimension

        Returns:
            Nonnegative float (exact for intervals and boxes)
        """
        if self.kind != 'ball':
            return float(norms(space, np.asarray(self.upper) - np.asarray(self.lower)))

        # ||x||_a <= d^(1/a - 1/b) ||x||_b for a <= b
        factor = 1.0
        if space.p < self.p:
            inv_a = 1.0 / space.p
            inv_b = 0.0 if math.isinf(self.p) else 1.0 / self.p
            factor = self.dim ** (inv_a - inv_b)
        return 2.0 * self.radius * factor

    def describe(self):
        if self.kind == 'ball':
            return f"ball center={list(self.center)} radius={self.radius:g} p={self.p:g}"
        if self.kind == 'interval':
            return f"interval [{self.lower[0]:g}, {self.upper[0]:g}]"
        return f"box {list(self.lower)} .. {list(self.upper)}"
