"""Exact lattice geometry: points, anti-diagonal lines, cones, parallelograms.

All membership tests are exact.  Halfwidths may be non-integer; they are
converted to ``Fraction`` (floats are dyadic rationals, so the conversion is
lossless) and every comparison is carried out in rational arithmetic.
Boundary cells are therefore decided deterministically, never by float
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import DegenerateRegion, InfeasibleQuery


@dataclass(frozen=True)
class Point:
    """Lattice point; level(p) = x + y counts anti-diagonals."""

    x: int
    y: int

    @property
    def level(self) -> int:
        return self.x + self.y

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def __le__(self, other: "Point") -> bool:
        # coordinatewise partial order (reachability by up-right steps)
        return self.x <= other.x and self.y <= other.y

    def __ge__(self, other: "Point") -> bool:
        return other.__le__(self)


E1 = Point(1, 0)
E2 = Point(0, 1)


def diagonal(a: int) -> Point:
    """The diagonal point (a, a)."""
    return Point(a, a)


def antidiagonal(j: int) -> Point:
    """The level-zero point (j, -j)."""
    return Point(j, -j)


def _halfwidth_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        h = value
    elif isinstance(value, int):
        h = Fraction(value)
    elif isinstance(value, float):
        h = Fraction(value)  # exact: every finite double is dyadic rational
    else:
        raise TypeError(f"halfwidth must be int, float, or Fraction, got {type(value)!r}")
    if h < 0:
        raise ValueError("halfwidth must be nonnegative")
    return h


@dataclass(frozen=True)
class Line:
    """A set of points on the anti-diagonal through ``anchor``.

    kind 'point' is the anchor alone, 'segment' the offsets |j| <= floor(h),
    'complement' everything on the line outside that window, 'full' the whole
    line.  Offset j corresponds to anchor + (j, -j).
    """

    anchor: Point
    kind: str
    halfwidth: Optional[Fraction] = None

    _KINDS = ("point", "segment", "complement", "full")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown line kind {self.kind!r}")
        if self.kind in ("segment", "complement"):
            if self.halfwidth is None:
                raise ValueError(f"{self.kind} line needs a halfwidth")
            object.__setattr__(self, "halfwidth", _halfwidth_fraction(self.halfwidth))
        elif self.halfwidth is not None:
            raise ValueError(f"{self.kind} line takes no halfwidth")

    @classmethod
    def point(cls, anchor: Point) -> "Line":
        return cls(anchor, "point")

    @classmethod
    def segment(cls, anchor: Point, halfwidth) -> "Line":
        return cls(anchor, "segment", halfwidth)

    @classmethod
    def complement(cls, anchor: Point, halfwidth) -> "Line":
        return cls(anchor, "complement", halfwidth)

    @classmethod
    def full(cls, anchor: Point) -> "Line":
        return cls(anchor, "full")

    @property
    def level(self) -> int:
        return self.anchor.level

    @property
    def int_halfwidth(self) -> int:
        """floor(halfwidth): the largest integer offset inside the window."""
        return math.floor(self.halfwidth)

    @property
    def bounded(self) -> bool:
        return self.kind in ("point", "segment")

    def member_bounds(self) -> Optional[tuple[int, int]]:
        """Inclusive x-range of members for bounded kinds, else None."""
        ax = self.anchor.x
        if self.kind == "point":
            return (ax, ax)
        if self.kind == "segment":
            h = self.int_halfwidth
            return (ax - h, ax + h)
        return None

    def member_intervals(self, xlo: int, xhi: int) -> list[tuple[int, int]]:
        """Member x-coordinates within [xlo, xhi] as disjoint inclusive intervals."""
        if xlo > xhi:
            return []
        ax = self.anchor.x
        if self.kind == "full":
            return [(xlo, xhi)]
        if self.kind in ("point", "segment"):
            a, b = self.member_bounds()
            a, b = max(a, xlo), min(b, xhi)
            return [(a, b)] if a <= b else []
        # complement: the line minus the closed window [ax-h, ax+h]
        h = self.int_halfwidth
        out = []
        if xlo <= ax - h - 1:
            out.append((xlo, min(xhi, ax - h - 1)))
        if ax + h + 1 <= xhi:
            out.append((max(xlo, ax + h + 1), xhi))
        return out

    def contains(self, p: Point) -> bool:
        if p.level != self.level:
            return False
        j = p.x - self.anchor.x
        if self.kind == "point":
            return j == 0
        if self.kind == "full":
            return True
        inside = abs(j) <= self.halfwidth
        return inside if self.kind == "segment" else not inside


LineLike = Union[Point, Line]


def as_line(obj: LineLike) -> Line:
    """Normalize a Point to the single-point Line through it."""
    if isinstance(obj, Point):
        return Line.point(obj)
    if isinstance(obj, Line):
        return obj
    raise TypeError(f"expected Point or Line, got {type(obj)!r}")


def cone_slice(target: LineLike, level: int) -> list[Point]:
    """Points at ``level`` from which some member of ``target`` is reachable
    by up-right steps, sorted by x.  Empty when no such point exists.

    Only bounded targets (point/segment) have a finite slice; unbounded kinds
    raise InfeasibleQuery.
    """
    tgt = as_line(target)
    if not tgt.bounded:
        raise InfeasibleQuery("cone of an unbounded line target is not enumerable")
    tlev = tgt.level
    if level > tlev:
        return []
    txlo, txhi = tgt.member_bounds()
    # p at this level reaches (tx, tlev - tx) iff p.x <= tx and p.y <= tlev - tx
    lo = txlo + level - tlev
    hi = txhi
    return [Point(x, level - x) for x in range(lo, hi + 1)]


@dataclass(frozen=True)
class Parallelogram:
    """Minkowski sum of the segment [start, end] with the anti-diagonal
    segment of the given halfwidth: the four corners are start +- (k, -k)
    and end +- (k, -k).

    Requires start <= end coordinatewise and start != end (an anti-diagonal
    axis would make the corner frame degenerate).
    """

    start: Point
    end: Point
    halfwidth: Fraction

    def __post_init__(self):
        object.__setattr__(self, "halfwidth", _halfwidth_fraction(self.halfwidth))
        if not self.start <= self.end:
            raise ValueError("parallelogram requires start <= end coordinatewise")
        if self.start == self.end:
            raise DegenerateRegion("parallelogram axis degenerates to a point")

    @property
    def level_lo(self) -> int:
        return self.start.level

    @property
    def level_hi(self) -> int:
        return self.end.level

    def _axis(self) -> tuple[int, int, int]:
        w = self.end - self.start
        return w.x, w.y, w.x + w.y  # span W = w.x + w.y > 0 by construction

    def contains(self, p: Point) -> bool:
        """Exact membership: p = start + t*(end-start) + s*(k,-k) with
        t in [0,1], s in [-1,1], decided in rational arithmetic."""
        wx, _, W = self._axis()
        q = p - self.start
        du = q.x + q.y
        if du < 0 or du > W:
            return False
        # |q.x - wx*du/W| <= k, scaled through by W to stay in integers
        return abs(q.x * W - wx * du) <= self.halfwidth * W

    def x_interval(self, level: int) -> Optional[tuple[int, int]]:
        """Inclusive x-range of member points at a given level, or None.

        One rational evaluation per level; DP sweeps consume these integer
        intervals so the per-cell hot path never touches rationals.
        """
        wx, _, W = self._axis()
        du = level - self.level_lo
        if du < 0 or du > W:
            return None
        center = self.start.x + Fraction(wx * du, W)
        lo = math.ceil(center - self.halfwidth)
        hi = math.floor(center + self.halfwidth)
        return (lo, hi) if lo <= hi else None

    def corners(self) -> list[Point]:
        """The four lattice corners, halfwidth rounded down to the lattice."""
        k = math.floor(self.halfwidth)
        d = Point(k, -k)
        return [self.start - d, self.start + d, self.end - d, self.end + d]

    def translate(self, w: Point) -> "Parallelogram":
        return Parallelogram(self.start + w, self.end + w, self.halfwidth)
