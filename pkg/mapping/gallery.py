"""
Mapping Gallery

Canonical hand-coded mappings with their documented properties. The
documented properties are claims to be re-verified by the condition
classifiers, never trusted as data.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional

import numpy as np

from errors import InputError
from mapping.dsl import Affine, Guard, Piece
from mapping.model import FixedPointSet, MappingDef
from space.domains import DomainSet

logger = logging.getLogger(__name__)

CONDITIONS = ('nonexpansive', 'condition-c', 'rsc', 'quasi-nonexpansive')


@dataclass(frozen=True)
class GalleryEntry:
    """
    A registered mapping constructor.

    known maps condition names to the documented verdict for the given
    parameters; fixed_points describes F(T).
    """

    id: str
    description: str
    builder: Callable[..., MappingDef]
    defaults: Dict[str, float] = field(default_factory=dict)
    known: Callable[..., Dict[str, bool]] = None
    fixed_points_note: str = ''
    test_only: bool = False

    def build(self, p=2.0, **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise InputError(f"gallery mapping {self.id} has no parameter(s) {sorted(unknown)}")
        values = {**self.defaults, **{k: float(v) for k, v in params.items()}}
        return self.builder(p=p, **values)

    def known_properties(self, **params):
        values = {**self.defaults, **{k: float(v) for k, v in params.items()}}
        return self.known(**values)

    @property
    def has_dsl(self):
        return self.build().pieces is not None

    def summary(self):
        return {
            'id': self.id,
            'description': self.description,
            'parameters': dict(self.defaults),
            'known': self.known_properties(),
            'fixed_points': self.fixed_points_note,
            'test_only': self.test_only,
        }


def _frac(value):
    return Fraction(repr(float(value)))


def _affine_pieces(lower, upper, slope, intercept):
    guard = Guard(_frac(lower), _frac(upper), True, True)
    return (Piece(guard=guard, expr=Affine(_frac(slope), _frac(intercept))),)


def _all(value, **overrides):
    flags = {name: value for name in CONDITIONS}
    flags.update(overrides)
    return flags


def _identity(p):
    return MappingDef.create(
        name='identity',
        domain=DomainSet.interval(0.0, 1.0),
        func=lambda x: x.copy(),
        p=p,
        fixed_points=FixedPointSet(whole_domain=True),
        pieces=_affine_pieces(0.0, 1.0, 1.0, 0.0),
        gallery_id='identity',
    )


def _constant(p, c):
    if not 0.0 <= c <= 1.0:
        raise InputError(f"constant map needs 0 <= c <= 1, got {c}")
    return MappingDef.create(
        name=f'constant(c={c:g})',
        domain=DomainSet.interval(0.0, 1.0),
        func=lambda x: np.full_like(x, c),
        p=p,
        fixed_points=FixedPointSet.of(c),
        pieces=_affine_pieces(0.0, 1.0, 0.0, c),
        gallery_id='constant',
        params={'c': c},
    )


def _halving(p):
    return MappingDef.create(
        name='halving',
        domain=DomainSet.interval(0.0, 1.0),
        func=lambda x: 0.5 * x,
        p=p,
        fixed_points=FixedPointSet.of(0.0),
        pieces=_affine_pieces(0.0, 1.0, 0.5, 0.0),
        gallery_id='halving',
    )


def _affine_contraction(p, a, b):
    if not abs(a) < 1.0:
        raise InputError(f"affine-contraction needs |a| < 1, got a={a}")
    return MappingDef.create(
        name=f'affine-contraction(a={a:g}, b={b:g})',
        domain=DomainSet.interval(0.0, 1.0),
        func=lambda x: a * x + b,
        p=p,
        fixed_points=FixedPointSet.of(b / (1.0 - a)),
        pieces=_affine_pieces(0.0, 1.0, a, b),
        gallery_id='affine-contraction',
        params={'a': a, 'b': b},
    )


def _reflection(p):
    return MappingDef.create(
        name='reflection',
        domain=DomainSet.interval(0.0, 1.0),
        func=lambda x: 1.0 - x,
        p=p,
        fixed_points=FixedPointSet.of(0.5),
        pieces=_affine_pieces(0.0, 1.0, -1.0, 1.0),
        gallery_id='reflection',
    )


def _suzuki_step(p):
    pieces = (
        Piece(guard=Guard(Fraction(0), Fraction(3), True, False), expr=Affine(Fraction(0), Fraction(0))),
        Piece(guard=Guard(Fraction(3), Fraction(3), True, True), expr=Affine(Fraction(0), Fraction(1))),
    )
    return MappingDef.create(
        name='suzuki-step',
        domain=DomainSet.interval(0.0, 3.0),
        func=lambda x: np.where(x < 3.0, 0.0, 1.0),
        p=p,
        fixed_points=FixedPointSet.of(0.0),
        pieces=pieces,
        gallery_id='suzuki-step',
    )


def _box_halving(p):
    return MappingDef.create(
        name='box-halving',
        domain=DomainSet.box((0.0, 0.0), (1.0, 1.0)),
        func=lambda x: 0.5 * x,
        p=p,
        fixed_points=FixedPointSet.of((0.0, 0.0)),
        gallery_id='box-halving',
    )


def _ball_halving(p):
    return MappingDef.create(
        name='ball-halving',
        domain=DomainSet.ball((0.0, 0.0), 1.0, p=p),
        func=lambda x: 0.5 * x,
        p=p,
        fixed_points=FixedPointSet.of((0.0, 0.0)),
        gallery_id='ball-halving',
    )


def _doubling(p):
    # Leaves its domain, so it is never validated as a self-map
    return MappingDef.create(
        name='doubling',
        domain=DomainSet.interval(0.0, 0.5),
        func=lambda x: 2.0 * x,
        p=p,
        fixed_points=FixedPointSet.of(0.0),
        gallery_id='doubling',
        validate=False,
    )


_REGISTRY = {
    entry.id: entry
    for entry in (
        GalleryEntry(
            id='identity',
            description='Tx = x on [0,1]',
            builder=_identity,
            known=lambda: _all(True, rsc=False),
            fixed_points_note='F(T) = [0,1]',
        ),
        GalleryEntry(
            id='constant',
            description='Tx = c on [0,1]',
            builder=_constant,
            defaults={'c': 0.3},
            known=lambda c: _all(True),
            fixed_points_note='F(T) = {c}',
        ),
        GalleryEntry(
            id='halving',
            description='Tx = x/2 on [0,1]',
            builder=_halving,
            known=lambda: _all(True),
            fixed_points_note='F(T) = {0}',
        ),
        GalleryEntry(
            id='affine-contraction',
            description='Tx = a*x + b on [0,1], |a| < 1',
            builder=_affine_contraction,
            defaults={'a': 0.9, 'b': 0.05},
            known=lambda a, b: _all(True, rsc=a <= 0.5),
            fixed_points_note='F(T) = {b/(1-a)}',
        ),
        GalleryEntry(
            id='reflection',
            description='Tx = 1 - x on [0,1]',
            builder=_reflection,
            known=lambda: _all(True),
            fixed_points_note='F(T) = {0.5}',
        ),
        GalleryEntry(
            id='suzuki-step',
            description='Tx = 0 on [0,3), T3 = 1',
            builder=_suzuki_step,
            known=lambda: _all(True, nonexpansive=False),
            fixed_points_note='F(T) = {0}',
        ),
        GalleryEntry(
            id='box-halving',
            description='Tx = x/2 on [0,1]^2',
            builder=_box_halving,
            known=lambda: _all(True),
            fixed_points_note='F(T) = {(0,0)}',
        ),
        GalleryEntry(
            id='ball-halving',
            description='Tx = x/2 on the closed unit ball of R^2',
            builder=_ball_halving,
            known=lambda: _all(True),
            fixed_points_note='F(T) = {(0,0)}',
        ),
        GalleryEntry(
            id='doubling',
            description='Tx = 2x on [0,1/2] (not a self-map)',
            builder=_doubling,
            known=lambda: _all(False),
            fixed_points_note='F(T) = {0}',
            test_only=True,
        ),
    )
}


def gallery_list(include_test_only=False):
    """
    Registered gallery entries in registration order.

    Args:
        include_test_only: Also return entries that exist only for tests

    Returns:
        List of GalleryEntry
    """
    return [e for e in _REGISTRY.values() if include_test_only or not e.test_only]


def gallery_entry(gallery_id):
    try:
        return _REGISTRY[gallery_id]
    except KeyError:
        raise InputError(f"unknown gallery id {gallery_id!r}; known: {sorted(_REGISTRY)}") from None


def gallery_get(gallery_id, p=2.0, **params):
    """Build the gallery mapping gallery_id with the given parameters."""
    return gallery_entry(gallery_id).build(p=p, **params)


def default_dsl(gallery_id) -> Optional[str]:
    """DSL text of a gallery mapping with default parameters, if it has one."""
    mapping = gallery_get(gallery_id)
    return mapping.to_dsl() if mapping.pieces is not None else None
