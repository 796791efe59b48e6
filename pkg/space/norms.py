"""
Norms and Tolerances

The space E is modelled as R^d with an lp norm, 1 <= p <= inf. All inequality
checks in the project compare through a single Tolerance.
"""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

from config import DEFAULT_ABS_FLOOR, DEFAULT_REL_TOL
from errors import InputError


class Tolerance(BaseModel):
    """Relative tolerance with an absolute floor: fail iff lhs > rhs*(1+rel) + floor."""

    model_config = ConfigDict(frozen=True)

    rel: float = Field(default=DEFAULT_REL_TOL, ge=0.0)
    floor: float = Field(default=DEFAULT_ABS_FLOOR, ge=0.0)

    def exceeds(self, lhs, rhs):
        """
        Whether lhs violates lhs <= rhs beyond tolerance.

        Args:
            lhs: Scalar or array
            rhs: Scalar or array broadcastable against lhs

        Returns:
            bool for scalar input, boolean array otherwise
        """
        result = np.greater(lhs, np.asarray(rhs) * (1.0 + self.rel) + self.floor)
        if np.ndim(result) == 0:
            return bool(result)
        return result

    def holds(self, lhs, rhs):
        """Negation of exceeds."""
        result = np.logical_not(self.exceeds(lhs, rhs))
        if np.ndim(result) == 0:
            return bool(result)
        return result


class NormSpec(BaseModel):
    """An lp norm on R^d."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan='constants')

    p: float = 2.0
    dim: PositiveInt = 1

    @field_validator('p')
    @classmethod
    def _check_exponent(cls, value):
        if math.isnan(value) or value < 1.0:
            raise ValueError(f"norm exponent must satisfy 1 <= p <= inf, got {value}")
        return value

    @property
    def uniformly_convex(self):
        return 1.0 < self.p < math.inf

    @property
    def label(self):
        return "inf" if math.isinf(self.p) else f"{self.p:g}"


def norms(space, points):
    """
    Vectorized lp norm along the last axis.

    Args:
        space: NormSpec
        points: Array of shape (..., dim)

    Returns:
        Array of shape (...) with the norms
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != space.dim:
        got = arr.shape[-1] if arr.ndim else 0
        raise InputError(f"dimension mismatch: expected vectors of length {space.dim}, got {got}")

    a = np.abs(arr)
    if space.p == 1.0:
        return a.sum(axis=-1)
    if space.p == 2.0:
        return np.sqrt((a * a).sum(axis=-1))
    if math.isinf(space.p):
        return a.max(axis=-1)

    # Scale by the largest modulus so the power sum cannot overflow
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0.0, scale, 1.0)
    powered = ((a / safe) ** space.p).sum(axis=-1) ** (1.0 / space.p)
    return np.where(scale[..., 0] > 0.0, scale[..., 0] * powered, 0.0)


def norm_eval(space, x):
    """
    lp norm of a single vector.

    Args:
        space: NormSpec
        x: Vector of length space.dim

    Returns:
        Nonnegative float
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"expected a vector, got an array of shape {arr.shape}")
    return float(norms(space, arr))


def distance(space, x, y):
    """Norm of x - y, vectorized over leading axes."""
    return norms(space, np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
