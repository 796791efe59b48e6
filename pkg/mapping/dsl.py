"""
Piecewise-Affine Mapping DSL

Line-oriented language for one-dimensional piecewise-affine self-maps:

    domain interval 0 3
    piece [0,3) : 0        # comments run to end of line
    piece [3,3] : 1

Guards and coefficients are read as exact fractions so that the coverage and
image checks are decided without rounding.
"""

import logging
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pyparsing as pp

from errors import DSLError
from space.domains import DomainSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Guard:
    lower: Fraction
    upper: Fraction
    lower_closed: bool
    upper_closed: bool

    def contains_many(self, x):
        lo, hi = float(self.lower), float(self.upper)
        above = x >= lo if self.lower_closed else x > lo
        below = x <= hi if self.upper_closed else x < hi
        return above & below

    def render(self):
        left = '[' if self.lower_closed else '('
        right = ']' if self.upper_closed else ')'
        return f"{left}{format_number(self.lower)},{format_number(self.upper)}{right}"


@dataclass(frozen=True)
class Affine:
    slope: Fraction
    intercept: Fraction

    def at(self, x):
        return self.slope * x + self.intercept

    def render(self):
        if self.slope == 0:
            return format_number(self.intercept)
        text = f"{format_number(self.slope)}*x"
        if self.intercept > 0:
            text += f" + {format_number(self.intercept)}"
        elif self.intercept < 0:
            text += f" - {format_number(-self.intercept)}"
        return text


@dataclass(frozen=True)
class Piece:
    guard: Guard
    expr: Affine
    line: int = 0
    expr_column: int = 0
    expr_text: str = ''


def format_number(value):
    """Exact decimal text for terminating fractions, shortest float repr otherwise."""
    value = Fraction(value)
    den = value.denominator
    while den % 2 == 0:
        den //= 2
    while den % 5 == 0:
        den //= 5
    if den != 1:
        return repr(float(value))
    text = format(Decimal(value.numerator) / Decimal(value.denominator), 'f')
    if '.' in text:
        text = text.rstrip('0').rstrip('.')
    return '0' if text == '-0' else text


# Grammar
NUMBER = pp.Regex(r'[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?').set_name('number')
UNSIGNED = pp.Regex(r'(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?').set_name('unsigned number')

DOMAIN_LINE = (
    pp.Keyword('domain') + pp.Keyword('interval') - NUMBER('lower') + NUMBER('upper')
)

GUARD = (
    pp.one_of('[ (')('left') + NUMBER('lower') + pp.Suppress(',') + NUMBER('upper') + pp.one_of('] )')('right')
)

SLOPE_TERM = (
    pp.Optional(NUMBER('slope') + pp.Suppress('*')) + pp.Regex(r'[+-]?x\b')('var')
)
OFFSET = pp.one_of('+ -')('op') + UNSIGNED('offset')
AFFINE = pp.Group(SLOPE_TERM + pp.Optional(OFFSET) | NUMBER('const'))('affine')

PIECE_LINE = pp.Keyword('piece') - GUARD + pp.Suppress(':') + AFFINE


def _fraction(text):
    return Fraction(text)


def _offending_token(line, loc):
    match = re.match(r'\S+', line[loc:])
    return match.group(0) if match else '<end of line>'


def _parse_line(grammar, line, lineno):
    try:
        return grammar.parse_string(line, parse_all=True)
    except pp.ParseBaseException as exc:
        raise DSLError(
            f"syntax error: {exc.msg}",
            line=lineno,
            column=exc.col,
            token=_offending_token(line, exc.loc),
        ) from None


def _affine_from(tokens):
    if 'const' in tokens:
        return Affine(Fraction(0), _fraction(tokens['const']))

    var = tokens['var']
    slope = _fraction(tokens['slope']) if 'slope' in tokens else Fraction(1)
    if var.startswith('-'):
        slope = -slope
    intercept = Fraction(0)
    if 'op' in tokens:
        intercept = _fraction(tokens['offset'])
        if tokens['op'] == '-':
            intercept = -intercept
    return Affine(slope, intercept)


def parse_pieces(source):
    """
    Parse DSL text into a domain interval and its pieces, without validation.

    Returns:
        (lower, upper, domain_line, pieces)
    """
    domain = None
    pieces = []

    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split('#', 1)[0].rstrip()
        if not line.strip():
            continue

        if domain is None:
            if not line.lstrip().startswith('domain'):
                column = len(line) - len(line.lstrip()) + 1
                raise DSLError("expected a 'domain interval <lower> <upper>' line first",
                               line=lineno, column=column, token=_offending_token(line, column - 1))
            tokens = _parse_line(DOMAIN_LINE, line, lineno)
            domain = (_fraction(tokens['lower']), _fraction(tokens['upper']), lineno)
            continue

        if line.lstrip().startswith('domain'):
            column = len(line) - len(line.lstrip()) + 1
            raise DSLError("duplicate domain line", line=lineno, column=column, token='domain')

        tokens = _parse_line(PIECE_LINE, line, lineno)
        colon = line.index(':')
        expr_text = line[colon + 1:].strip()
        expr_column = line.index(expr_text, colon + 1) + 1 if expr_text else colon + 2
        guard = Guard(
            lower=_fraction(tokens['lower']),
            upper=_fraction(tokens['upper']),
            lower_closed=tokens['left'] == '[',
            upper_closed=tokens['right'] == ']',
        )
        pieces.append(Piece(
            guard=guard,
            expr=_affine_from(tokens['affine']),
            line=lineno,
            expr_column=expr_column,
            expr_text=expr_text,
        ))

    if domain is None:
        raise DSLError("empty mapping source: missing domain line", line=1, column=1)
    if not pieces:
        raise DSLError("mapping needs at least one piece line", line=domain[2], column=1)
    return domain[0], domain[1], domain[2], pieces


def _bracketed(lower, lower_closed, upper, upper_closed):
    left = '[' if lower_closed else '('
    right = ']' if upper_closed else ')'
    return f"{left}{format_number(lower)}, {format_number(upper)}{right}"


def check_pieces(lower, upper, domain_line, pieces):
    """
    Check that the guards partition [lower, upper] and that every piece maps
    its guard into [lower, upper]. Decided exactly on the endpoints.

    Returns:
        The pieces sorted by position along the domain

    Raises:
        DSLError: empty guard, guard outside the domain, gap, overlap or image escape
    """
    if lower > upper:
        raise DSLError(f"empty domain interval [{format_number(lower)}, {format_number(upper)}]",
                       line=domain_line, column=1)

    for piece in pieces:
        g = piece.guard
        if g.lower > g.upper or (g.lower == g.upper and not (g.lower_closed and g.upper_closed)):
            raise DSLError(f"empty guard {g.render()}", line=piece.line, column=1, token=g.render())
        if g.lower < lower or g.upper > upper:
            raise DSLError(f"guard {g.render()} extends outside the domain", line=piece.line,
                           column=1, token=g.render())

    ordered = sorted(pieces, key=lambda pc: (pc.guard.lower, not pc.guard.lower_closed))
    frontier, covered = lower, False
    for piece in ordered:
        g = piece.guard
        if g.lower > frontier:
            gap = _bracketed(frontier, not covered, g.lower, not g.lower_closed)
            raise DSLError(f"guard gap {gap} is not covered", line=piece.line, column=1, token=g.render())
        if g.lower < frontier or (covered and g.lower_closed):
            raise DSLError(f"guard {g.render()} overlaps a previous piece", line=piece.line,
                           column=1, token=g.render())
        if not covered and not g.lower_closed:
            raise DSLError(f"guard gap at {format_number(frontier)} is not covered", line=piece.line,
                           column=1, token=g.render())
        frontier, covered = g.upper, g.upper_closed

    if frontier < upper or not covered:
        last = ordered[-1]
        gap = _bracketed(frontier, not covered, upper, True)
        raise DSLError(f"guard gap {gap} is not covered", line=last.line, column=1,
                       token=last.guard.render())

    for piece in ordered:
        g = piece.guard
        for endpoint in (g.lower, g.upper):
            image = piece.expr.at(endpoint)
            if image < lower or image > upper:
                raise DSLError(
                    f"image {format_number(image)} of {format_number(endpoint)} escapes the domain "
                    f"[{format_number(lower)}, {format_number(upper)}]",
                    line=piece.line, column=piece.expr_column, token=piece.expr_text,
                )
    return tuple(ordered)


def piecewise_function(pieces, lower, upper):
    """
    Vectorized evaluator for validated pieces on the domain [lower, upper].

    Images are clipped to the float domain: check_pieces proved them exactly
    inside, so clipping only removes float rounding.
    """
    coefficients = [(p.guard, float(p.expr.slope), float(p.expr.intercept)) for p in pieces]
    lo, hi = float(lower), float(upper)

    def apply(points):
        x = points[:, 0]
        out = np.full_like(x, np.nan)
        for guard, slope, intercept in coefficients:
            mask = guard.contains_many(x)
            out[mask] = np.clip(slope * x[mask] + intercept, lo, hi)
        return out[:, None]

    return apply


def parse_mapping(source, name='dsl', p=2.0):
    """
    Parse and validate a DSL mapping.

    Args:
        source: DSL text
        name: Name given to the mapping
        p: Norm exponent of the ambient space

    Returns:
        Validated MappingDef

    Raises:
        DSLError: with line, column and offending token
    """
    from mapping.model import MappingDef

    lower, upper, domain_line, pieces = parse_pieces(source)
    ordered = check_pieces(lower, upper, domain_line, pieces)
    domain = DomainSet.interval(float(lower), float(upper))
    logger.debug("Parsed %d pieces on %s", len(ordered), domain.describe())
    return MappingDef.create(
        name=name,
        domain=domain,
        func=piecewise_function(ordered, lower, upper),
        p=p,
        pieces=ordered,
    )


def format_mapping(domain, pieces):
    """Pretty-print a 1D domain and its pieces as DSL text."""
    lines = [f"domain interval {format_number(Fraction(repr(domain.lower[0])))} "
             f"{format_number(Fraction(repr(domain.upper[0])))}"]
    for piece in pieces:
        lines.append(f"piece {piece.guard.render()} : {piece.expr.render()}")
    return '\n'.join(lines) + '\n'
