"""Exact rational plane geometry: points, segments, slopes, intersections.

All coordinates are `fractions.Fraction`.  Nothing in this module ever rounds:
predicates (collinearity, right angles, intersection classification) are
decided by exact sign tests on cross/dot products.  Floats are rejected at the
boundary because a float fed into Fraction silently freezes binary rounding
error into an "exact" value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Optional, Union

from .errors import ParseError

Rational = Fraction

RationalLike = Union[Fraction, int, str]


def rat(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction, or "p/q" string to an exact rational.

    Floats are rejected on purpose; callers must decide how to rationalize
    them rather than inheriting rounding noise.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def format_rational(value: Fraction) -> str:
    """Serialize as "p" or "p/q" (the form `parse_rational` accepts)."""
    return str(value)


def parse_rational(text: str) -> Fraction:
    if not isinstance(text, str):
        raise ParseError(f"rational literal must be a string, got {type(text).__name__}")
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational literal {text!r}") from exc
    return value


class Point(NamedTuple):
    x: Fraction
    y: Fraction

    def __str__(self) -> str:  # compact debug form
        return f"({self.x}, {self.y})"


def pt(x: RationalLike, y: RationalLike) -> Point:
    return Point(rat(x), rat(y))


def sub(p: Point, q: Point) -> Point:
    return Point(p.x - q.x, p.y - q.y)


def add(p: Point, q: Point) -> Point:
    return Point(p.x + q.x, p.y + q.y)


def scale(p: Point, k: Fraction) -> Point:
    return Point(p.x * k, p.y * k)


def cross(p: Point, q: Point) -> Fraction:
    return p.x * q.y - p.y * q.x


def dot(p: Point, q: Point) -> Fraction:
    return p.x * q.x + p.y * q.y


def dist2(p: Point, q: Point) -> Fraction:
    d = sub(p, q)
    return dot(d, d)


def orient(a: Point, b: Point, c: Point) -> Fraction:
    """Signed doubled area of (a, b, c): >0 left turn, <0 right turn, 0 collinear."""
    return cross(sub(b, a), sub(c, a))


def collinear(a: Point, b: Point, c: Point) -> bool:
    return orient(a, b, c) == 0


def midpoint(p: Point, q: Point) -> Point:
    half = Fraction(1, 2)
    return Point((p.x + q.x) * half, (p.y + q.y) * half)


@dataclass(frozen=True, slots=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"degenerate segment at {self.a}")

    @property
    def direction(self) -> Point:
        return sub(self.b, self.a)

    def endpoints(self) -> tuple[Point, Point]:
        return (self.a, self.b)

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)

    def point_at(self, t: Fraction) -> Point:
        d = self.direction
        return Point(self.a.x + t * d.x, self.a.y + t * d.y)

    def param_of(self, p: Point) -> Fraction:
        """Parameter t with point_at(t) == p; caller guarantees p is on the line."""
        d = self.direction
        return dot(sub(p, self.a), d) / dot(d, d)

    def contains(self, p: Point) -> bool:
        """True when p lies on the closed segment."""
        if orient(self.a, self.b, p) != 0:
            return False
        t = self.param_of(p)
        return 0 <= t <= 1

    def bbox(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (
            min(self.a.x, self.b.x),
            min(self.a.y, self.b.y),
            max(self.a.x, self.b.x),
            max(self.a.y, self.b.y),
        )


def seg(ax: RationalLike, ay: RationalLike, bx: RationalLike, by: RationalLike) -> Segment:
    return Segment(pt(ax, ay), pt(bx, by))


class IntersectionKind(Enum):
    """How two segments meet, classified exactly.

    EMPTY            no common point
    PROPER_CROSSING  a single common point interior to both
    SHARED_ENDPOINT  a single common point that is an endpoint of both
    TOUCH            a single common point that is an endpoint of exactly one
                     (a T-junction; drawn graphs must never contain these)
    OVERLAP          infinitely many common points (collinear overlap)
    """

    EMPTY = "empty"
    PROPER_CROSSING = "proper-crossing"
    SHARED_ENDPOINT = "shared-endpoint"
    TOUCH = "touch"
    OVERLAP = "overlap"


class Intersection(NamedTuple):
    kind: IntersectionKind
    point: Optional[Point]  # set for the three single-point kinds


_EMPTY = Intersection(IntersectionKind.EMPTY, None)


def _classify_single_point(p: Point, s1: Segment, s2: Segment) -> Intersection:
    on_end_1 = p == s1.a or p == s1.b
    on_end_2 = p == s2.a or p == s2.b
    if on_end_1 and on_end_2:
        return Intersection(IntersectionKind.SHARED_ENDPOINT, p)
    if on_end_1 or on_end_2:
        return Intersection(IntersectionKind.TOUCH, p)
    return Intersection(IntersectionKind.PROPER_CROSSING, p)


def seg_intersection(s1: Segment, s2: Segment) -> Intersection:
    """Exact intersection of two closed segments."""
    d1 = s1.direction
    d2 = s2.direction
    denom = cross(d1, d2)
    offset = sub(s2.a, s1.a)

    if denom != 0:
        t = cross(offset, d2) / denom
        u = cross(offset, d1) / denom
        if 0 <= t <= 1 and 0 <= u <= 1:
            return _classify_single_point(s1.point_at(t), s1, s2)
        return _EMPTY

    # Parallel.  Distinct lines -> empty; same line -> 1-D interval overlap.
    if cross(offset, d1) != 0:
        return _EMPTY
    t_lo = s1.param_of(s2.a)
    t_hi = s1.param_of(s2.b)
    if t_lo > t_hi:
        t_lo, t_hi = t_hi, t_lo
    lo = max(t_lo, Fraction(0))
    hi = min(t_hi, Fraction(1))
    if lo > hi:
        return _EMPTY
    if lo == hi:
        # Collinear single-point contact is necessarily endpoint-to-endpoint.
        return _classify_single_point(s1.point_at(lo), s1, s2)
    return Intersection(IntersectionKind.OVERLAP, None)


def is_right_angle(d1: Point, d2: Point) -> bool:
    return dot(d1, d2) == 0


def segments_right_angle(s1: Segment, s2: Segment) -> bool:
    return is_right_angle(s1.direction, s2.direction)


@dataclass(frozen=True, slots=True, order=False)
class SlopeClass:
    """Direction of a line with orientation forgotten.

    Vertical lines sort before all finite slopes; finite slopes sort by value.
    That total order is what picks the canonical member of a pair of
    perpendicular classes.
    """

    vertical: bool
    value: Optional[Fraction]  # None iff vertical

    @staticmethod
    def of(d: Point) -> "SlopeClass":
        if d.x == 0 and d.y == 0:
            raise ValueError("zero vector has no slope")
        if d.x == 0:
            return SlopeClass(True, None)
        return SlopeClass(False, d.y / d.x)

    @staticmethod
    def of_segment(s: Segment) -> "SlopeClass":
        return SlopeClass.of(s.direction)

    def sort_key(self) -> tuple:
        return (0,) if self.vertical else (1, self.value)

    def __lt__(self, other: "SlopeClass") -> bool:
        return self.sort_key() < other.sort_key()

    def perpendicular(self) -> "SlopeClass":
        if self.vertical:
            return SlopeClass(False, Fraction(0))
        if self.value == 0:
            return SlopeClass(True, None)
        return SlopeClass(False, -1 / self.value)

    def is_perpendicular_to(self, other: "SlopeClass") -> bool:
        return self.perpendicular() == other

    def __str__(self) -> str:
        return "vertical" if self.vertical else f"slope {self.value}"


def slope_class(s: Segment) -> SlopeClass:
    return SlopeClass.of(s.direction)


def rational_cos_sin(max_sin: Fraction) -> tuple[Fraction, Fraction]:
    """An exactly-unit direction (cos, sin) with 0 < sin <= max_sin.

    Uses the tangent-half-angle family ((k^2-1)/(k^2+1), 2k/(k^2+1)); larger k
    means a shallower angle.  Lets constructions squeeze into arbitrarily thin
    regions while keeping every derived distance rational.
    """
    if max_sin <= 0:
        raise ValueError("max_sin must be positive")
    if max_sin > 1:
        max_sin = Fraction(1)
    # sin = 2k/(k^2+1) <= 2/k, so k >= 2/max_sin suffices.
    k = max(2, math.ceil(Fraction(2) / max_sin))
    kk = Fraction(k) * k
    return ((kk - 1) / (kk + 1), 2 * k / (kk + 1))


def point_on_circle(center: Point, radius: Fraction, cos_sin: tuple[Fraction, Fraction]) -> Point:
    c, s = cos_sin
    return Point(center.x + radius * c, center.y + radius * s)
