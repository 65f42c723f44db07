"""Exact rational geometry: scalars, points, axis-aligned boxes and l-infinity balls.

Every coordinate is a :class:`fractions.Fraction`.  Boundary membership for
half-open partition cubes is decided exactly, so nothing in here ever touches
binary floating point unless a caller explicitly converts one with
:func:`scalar_from_float`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Point = tuple[Fraction, ...]

_DECIMAL = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\s*$")
_RATIO = re.compile(r"^\s*[+-]?\d+\s*/\s*[+-]?\d+\s*$")


class ParseError(ValueError):
    """Raised when text cannot be read as an exact rational."""


class DimensionError(ValueError):
    """Raised when two geometric objects live in different dimensions."""


def scalar_from_decimal(text: str) -> Fraction:
    """Parse a finite decimal such as ``"-1.25"`` or ``"3e-2"`` exactly."""
    if not isinstance(text, str) or not _DECIMAL.match(text):
        raise ParseError(f"not a finite decimal: {text!r}")
    return Fraction(text.strip())


def parse_scalar(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"``, an integer, or a finite decimal."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"expected a rational string, got {type(text).__name__}")
    if _RATIO.match(text):
        num, den = text.split("/")
        if int(den) == 0:
            raise ParseError(f"zero denominator: {text!r}")
        return Fraction(int(num), int(den))
    return scalar_from_decimal(text)


def scalar_from_float(value: float) -> Fraction:
    """Exact dyadic conversion of a binary float (no rounding happens)."""
    if value != value or value in (float("inf"), float("-inf")):
        raise ParseError(f"non-finite float: {value!r}")
    return Fraction(value)


def format_scalar(x: Fraction) -> str:
    """Canonical ``"num/den"`` text, always with an explicit denominator."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def make_point(coords: Iterable[Fraction | int | str]) -> Point:
    pt = tuple(parse_scalar(c) for c in coords)
    if not pt:
        raise DimensionError("a point needs at least one coordinate")
    return pt


def point_to_json(p: Sequence[Fraction]) -> list[str]:
    return [format_scalar(c) for c in p]


def point_from_json(data: str | list) -> Point:
    if isinstance(data, str):
        data = json.loads(data)
    return make_point(data)


def _check_dims(*objs: Sequence) -> int:
    dims = {len(o) for o in objs}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def sup_distance(p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    _check_dims(p, q)
    return max(abs(a - b) for a, b in zip(p, q))


@dataclass(frozen=True)
class AxisBox:
    """Product of intervals with a closed/open flag at each end of each axis."""

    low: Point
    high: Point
    closed_low: tuple[bool, ...]
    closed_high: tuple[bool, ...]

    def __post_init__(self) -> None:
        d = _check_dims(self.low, self.high, self.closed_low, self.closed_high)
        if d == 0:
            raise DimensionError("a box needs at least one axis")
        for lo, hi in zip(self.low, self.high):
            if lo > hi:
                raise ValueError(f"low {lo} exceeds high {hi}")

    @property
    def dim(self) -> int:
        return len(self.low)

    @classmethod
    def half_open(cls, low: Sequence, high: Sequence) -> AxisBox:
        low, high = make_point(low), make_point(high)
        d = len(low)
        return cls(low, high, (True,) * d, (False,) * d)

    @classmethod
    def closed(cls, low: Sequence, high: Sequence) -> AxisBox:
        low, high = make_point(low), make_point(high)
        d = len(low)
        return cls(low, high, (True,) * d, (True,) * d)

    @classmethod
    def open(cls, low: Sequence, high: Sequence) -> AxisBox:
        low, high = make_point(low), make_point(high)
        d = len(low)
        return cls(low, high, (False,) * d, (False,) * d)

    @classmethod
    def cube(cls, corner: Sequence, side: Fraction | int = 1) -> AxisBox:
        """The half-open cube ``corner + [0, side)^d``."""
        corner = make_point(corner)
        side = Fraction(side)
        return cls.half_open(corner, tuple(c + side for c in corner))

    def axis(self, i: int) -> tuple[Fraction, Fraction, bool, bool]:
        return self.low[i], self.high[i], self.closed_low[i], self.closed_high[i]

    def is_empty(self) -> bool:
        for lo, hi, cl, ch in zip(self.low, self.high, self.closed_low, self.closed_high):
            if lo == hi and not (cl and ch):
                return True
        return False

    def side_lengths(self) -> tuple[Fraction, ...]:
        return tuple(hi - lo for lo, hi in zip(self.low, self.high))

    def contains(self, p: Sequence[Fraction]) -> bool:
        _check_dims(self.low, p)
        for (lo, hi, cl, ch), x in zip(map(self.axis, range(self.dim)), p):
            if x < lo or (x == lo and not cl):
                return False
            if x > hi or (x == hi and not ch):
                return False
        return True

    def intersects(self, other: AxisBox) -> bool:
        _check_dims(self.low, other.low)
        for i in range(self.dim):
            if not _intervals_meet(self.axis(i), other.axis(i)):
                return False
        return True

    def is_subset_of(self, other: AxisBox) -> bool:
        if self.is_empty():
            return True
        _check_dims(self.low, other.low)
        for i in range(self.dim):
            lo, hi, cl, ch = self.axis(i)
            olo, ohi, ocl, och = other.axis(i)
            if lo < olo or (lo == olo and cl and not ocl):
                return False
            if hi > ohi or (hi == ohi and ch and not och):
                return False
        return True

    def minkowski_sum(self, other: AxisBox) -> AxisBox:
        """Exact Minkowski sum; an end is closed only when both summand ends are."""
        _check_dims(self.low, other.low)
        if self.is_empty() or other.is_empty():
            d = self.dim
            return AxisBox(self.low, self.low, (False,) * d, (False,) * d)
        return AxisBox(
            tuple(a + b for a, b in zip(self.low, other.low)),
            tuple(a + b for a, b in zip(self.high, other.high)),
            tuple(a and b for a, b in zip(self.closed_low, other.closed_low)),
            tuple(a and b for a, b in zip(self.closed_high, other.closed_high)),
        )

    def translate(self, v: Sequence[Fraction]) -> AxisBox:
        _check_dims(self.low, v)
        return AxisBox(
            tuple(a + b for a, b in zip(self.low, v)),
            tuple(a + b for a, b in zip(self.high, v)),
            self.closed_low,
            self.closed_high,
        )

    def split(self, axis: int, at: Fraction) -> tuple[AxisBox, AxisBox]:
        """Cut into ``[low, at)`` and ``[at, high]`` along ``axis``."""
        lo, hi = self.low[axis], self.high[axis]
        if not lo <= at <= hi:
            raise ValueError(f"cut {at} outside [{lo}, {hi}]")
        left_high = self.high[:axis] + (at,) + self.high[axis + 1:]
        right_low = self.low[:axis] + (at,) + self.low[axis + 1:]
        left = AxisBox(
            self.low, left_high, self.closed_low,
            self.closed_high[:axis] + (False,) + self.closed_high[axis + 1:],
        )
        right = AxisBox(
            right_low, self.high,
            self.closed_low[:axis] + (True,) + self.closed_low[axis + 1:],
            self.closed_high,
        )
        return left, right

    def to_json(self) -> dict:
        return {
            "low": point_to_json(self.low),
            "high": point_to_json(self.high),
            "closed_low": list(self.closed_low),
            "closed_high": list(self.closed_high),
        }

    @classmethod
    def from_json(cls, data: dict) -> AxisBox:
        low = make_point(data["low"])
        high = make_point(data["high"])
        d = len(low)
        return cls(
            low,
            high,
            tuple(bool(b) for b in data.get("closed_low", [True] * d)),
            tuple(bool(b) for b in data.get("closed_high", [False] * d)),
        )


def _intervals_meet(a: tuple, b: tuple) -> bool:
    alo, ahi, acl, ach = a
    blo, bhi, bcl, bch = b
    lo, lo_closed = (alo, acl) if alo > blo else (blo, bcl) if blo > alo else (alo, acl and bcl)
    hi, hi_closed = (ahi, ach) if ahi < bhi else (bhi, bch) if bhi < ahi else (ahi, ach and bch)
    if lo < hi:
        return True
    return lo == hi and lo_closed and hi_closed


def box_volume(b: AxisBox) -> Fraction:
    """Lebesgue measure; closure flags are irrelevant and empty boxes have volume 0."""
    vol = Fraction(1)
    for side in b.side_lengths():
        vol *= side
    return vol


@dataclass(frozen=True)
class InfBall:
    """l-infinity ball; as a set it is the box ``center + [-r, r]^d``."""

    center: Point
    radius: Fraction
    closed: bool = True

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def kind(self) -> str:
        return "closed" if self.closed else "open"

    def as_box(self) -> AxisBox:
        r = self.radius
        d = self.dim
        return AxisBox(
            tuple(c - r for c in self.center),
            tuple(c + r for c in self.center),
            (self.closed,) * d,
            (self.closed,) * d,
        )

    def contains(self, p: Sequence[Fraction]) -> bool:
        dist = sup_distance(self.center, p)
        return dist <= self.radius if self.closed else dist < self.radius


def ball(center: Sequence, radius: Fraction | int | str, kind: str = "closed") -> InfBall:
    if kind not in ("closed", "open"):
        raise ValueError(f"ball kind must be 'closed' or 'open', not {kind!r}")
    return InfBall(make_point(center), parse_scalar(radius), kind == "closed")


def box_intersects_ball(cube: AxisBox, b: InfBall) -> bool:
    """Whether a half-open cube ``[a, a+s)`` meets an l-infinity ball.

    Closed ball: ``a_i <= p_i + r`` and ``a_i + s_i > p_i - r`` on every axis.
    Open ball: the first comparison becomes strict (and radius 0 is empty).
    """
    _check_dims(cube.low, b.center)
    r = b.radius
    if not b.closed and r == 0:
        return False
    for a, top, p in zip(cube.low, cube.high, b.center):
        if b.closed:
            if not (a <= p + r and top > p - r):
                return False
        elif not (a < p + r and top > p - r):
            return False
    return True
