"""Unit-cube partitions of R^d: grid, layered, products and scalings.

A member is named by a tuple of integers (a ``MemberId``).  For a grid these
are the cell indices; for a layered partition they are the layer indices from
the top coordinate down to the first; a product concatenates the ids of its
factors and a scaling reuses the ids of the partition it scales.

Every partition here is periodic under the lattice spanned by its member
corners, and one member cube is a fundamental domain of that lattice.  The
neighborhood search relies on this.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

from .geometry import AxisBox, DimensionError, Point, format_scalar, make_point, parse_scalar

MemberId = tuple[int, ...]


def _floor(x: Fraction) -> int:
    return math.floor(x)


def unit_range(lo: Fraction, hi: Fraction, closed_low: bool, closed_high: bool) -> range:
    """Integers ``n`` whose cell ``[n, n+1)`` meets the interval from lo to hi."""
    if lo > hi or (lo == hi and not (closed_low and closed_high)):
        return range(0)
    first = math.floor(lo)
    last = math.floor(hi) if closed_high else math.ceil(hi) - 1
    return range(first, last + 1)


@dataclass(frozen=True)
class SecludedClaim:
    k: int
    epsilon: Fraction

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("degree k must be at least 1")
        if self.epsilon < 0:
            raise ValueError("tolerance must be nonnegative")


class PartitionSpec:
    """Shared interface of every partition variant."""

    dim: int

    def member_of(self, x: Sequence[Fraction]) -> MemberId:
        raise NotImplementedError

    def corner_of(self, member: MemberId) -> Point:
        raise NotImplementedError

    def sides(self) -> tuple[Fraction, ...]:
        """Side length of the member cubes along each axis."""
        raise NotImplementedError

    def residues(self, axis: int) -> tuple[Fraction, ...]:
        """Sorted corner coordinates along ``axis`` reduced modulo the side length."""
        raise NotImplementedError

    def members_meeting(self, query: AxisBox) -> Iterator[MemberId]:
        """Every member whose cube meets ``query``, enumerated window by window."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check_point(self, x: Sequence) -> None:
        if len(x) != self.dim:
            raise DimensionError(f"point has dimension {len(x)}, partition has {self.dim}")

    def _check_id(self, member: Sequence[int]) -> None:
        if len(member) != self.dim:
            raise ValueError(f"member id has length {len(member)}, expected {self.dim}")

    def cube_of(self, member: MemberId) -> AxisBox:
        corner = self.corner_of(member)
        return AxisBox.half_open(corner, tuple(c + s for c, s in zip(corner, self.sides())))

    def center_of(self, member: MemberId) -> Point:
        corner = self.corner_of(member)
        return tuple(c + s / 2 for c, s in zip(corner, self.sides()))

    def contains(self, member: MemberId, y: Sequence[Fraction]) -> bool:
        return self.cube_of(member).contains(tuple(y))


@dataclass(frozen=True)
class Grid(PartitionSpec):
    """The standard partition into half-open unit cubes with integer corners."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")

    def member_of(self, x):
        self._check_point(x)
        return tuple(_floor(c) for c in x)

    def corner_of(self, member):
        self._check_id(member)
        return tuple(Fraction(n) for n in member)

    def sides(self):
        return (Fraction(1),) * self.dim

    def residues(self, axis):
        return (Fraction(0),)

    def members_meeting(self, query):
        if query.dim != self.dim:
            raise DimensionError("query dimension mismatch")
        ranges = [unit_range(*query.axis(i)) for i in range(self.dim)]
        yield from itertools.product(*ranges)

    def to_json(self):
        return {"type": "grid", "d": self.dim}


def _subgroup_mod_one(generators: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """The additive subgroup of Q/Z generated by ``generators``."""
    seen = {Fraction(0)}
    frontier = [Fraction(0)]
    while frontier:
        x = frontier.pop()
        for g in generators:
            y = (x + g) % 1
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return tuple(sorted(seen))


@dataclass(frozen=True)
class Layered(PartitionSpec):
    """Recursive layered unit-cube partition.

    Layer ``n`` along the top coordinate is the (d-1)-dimensional layered
    partition translated by ``n * shift`` in every remaining coordinate.
    ``shifts[j]`` is used when peeling coordinate ``j + 2`` (1-based), so the
    list has ``d - 1`` entries.
    """

    dim: int
    shifts: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        if len(self.shifts) != self.dim - 1:
            raise ValueError(f"layered partition of R^{self.dim} needs {self.dim - 1} shifts")
        object.__setattr__(self, "shifts", tuple(Fraction(s) for s in self.shifts))

    def member_of(self, x):
        self._check_point(x)
        x = list(x)
        ids = []
        for j in range(self.dim - 1, 0, -1):
            n = _floor(x[j])
            ids.append(n)
            if n:
                step = n * self.shifts[j - 1]
                for i in range(j):
                    x[i] -= step
        ids.append(_floor(x[0]))
        return tuple(ids)

    def corner_of(self, member):
        self._check_id(member)
        d = self.dim
        per_axis = list(reversed(member))
        corner = [Fraction(n) for n in per_axis]
        for j in range(1, d):
            step = per_axis[j] * self.shifts[j - 1]
            for i in range(j):
                corner[i] += step
        return tuple(corner)

    def sides(self):
        return (Fraction(1),) * self.dim

    def residues(self, axis):
        return _subgroup_mod_one(self.shifts[axis:])

    def members_meeting(self, query):
        if query.dim != self.dim:
            raise DimensionError("query dimension mismatch")
        yield from self._meeting(self.dim - 1, list(zip(query.low, query.high)), query, ())

    def _meeting(self, j, bounds, query, prefix):
        lo, hi = bounds[j]
        layers = unit_range(lo, hi, query.closed_low[j], query.closed_high[j])
        if j == 0:
            for n in layers:
                yield prefix + (n,)
            return
        shift = self.shifts[j - 1]
        for n in layers:
            step = n * shift
            inner = [(a - step, b - step) for a, b in bounds[:j]]
            yield from self._meeting(j - 1, inner, query, prefix + (n,))

    def to_json(self):
        return {"type": "layered", "d": self.dim, "shifts": [format_scalar(s) for s in self.shifts]}


@dataclass(frozen=True)
class Product(PartitionSpec):
    """Members are products of members of the factors, coordinates concatenated."""

    factors: tuple[PartitionSpec, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("a product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def _blocks(self) -> list[slice]:
        out, start = [], 0
        for f in self.factors:
            out.append(slice(start, start + f.dim))
            start += f.dim
        return out

    def member_of(self, x):
        self._check_point(x)
        x = tuple(x)
        return sum((f.member_of(x[b]) for f, b in zip(self.factors, self._blocks())), ())

    def corner_of(self, member):
        self._check_id(member)
        member = tuple(member)
        return sum((f.corner_of(member[b]) for f, b in zip(self.factors, self._blocks())), ())

    def sides(self):
        return sum((f.sides() for f in self.factors), ())

    def residues(self, axis):
        for f, b in zip(self.factors, self._blocks()):
            if b.start <= axis < b.stop:
                return f.residues(axis - b.start)
        raise IndexError(axis)

    def members_meeting(self, query):
        if query.dim != self.dim:
            raise DimensionError("query dimension mismatch")
        parts = []
        for f, b in zip(self.factors, self._blocks()):
            sub = AxisBox(query.low[b], query.high[b], query.closed_low[b], query.closed_high[b])
            parts.append(list(f.members_meeting(sub)))
        for combo in itertools.product(*parts):
            yield sum(combo, ())

    def to_json(self):
        return {"type": "product", "factors": [f.to_json() for f in self.factors]}


@dataclass(frozen=True)
class Scaled(PartitionSpec):
    """Every member cube of ``inner`` multiplied by ``factor``."""

    inner: PartitionSpec
    factor: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "factor", Fraction(self.factor))
        if self.factor <= 0:
            raise ValueError("scale factor must be positive")

    @property
    def dim(self) -> int:
        return self.inner.dim

    def member_of(self, x):
        self._check_point(x)
        return self.inner.member_of(tuple(c / self.factor for c in x))

    def corner_of(self, member):
        return tuple(self.factor * c for c in self.inner.corner_of(member))

    def sides(self):
        return tuple(self.factor * s for s in self.inner.sides())

    def residues(self, axis):
        return tuple(self.factor * r for r in self.inner.residues(axis))

    def members_meeting(self, query):
        s = self.factor
        inner_query = AxisBox(
            tuple(c / s for c in query.low),
            tuple(c / s for c in query.high),
            query.closed_low,
            query.closed_high,
        )
        yield from self.inner.members_meeting(inner_query)

    def to_json(self):
        return {"type": "scaled", "inner": self.inner.to_json(), "factor": format_scalar(self.factor)}


Spec = Union[Grid, Layered, Product, Scaled]


def grid(d: int) -> Grid:
    return Grid(d)


def descending_shifts(d: int) -> tuple[Fraction, ...]:
    """Shift ``(d - j)/d`` when peeling coordinate ``j + 1``: ``[(d-1)/d, ..., 1/d]``.

    Exact audits certify this schedule as (d+1, 1/(2d))-secluded for d <= 6.
    """
    return tuple(Fraction(d - j, d) for j in range(1, d))


def uniform_shifts(d: int) -> tuple[Fraction, ...]:
    """Shift ``1/d`` at every level.  Not (d+1, 1/(2d))-secluded once d >= 3."""
    return (Fraction(1, d),) * (d - 1)


SCHEDULES = {"descending": descending_shifts, "uniform": uniform_shifts}


def layered(d: int, shifts: Sequence[Fraction | str] | str | None = None) -> Layered:
    """Layered partition of R^d; ``shifts`` is a list or a schedule name (default ``descending``)."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if shifts is None:
        shifts = "descending"
    if isinstance(shifts, str):
        if shifts not in SCHEDULES:
            raise ValueError(f"unknown shift schedule {shifts!r}; choose from {sorted(SCHEDULES)}")
        shifts = SCHEDULES[shifts](d)
    return Layered(d, tuple(parse_scalar(s) for s in shifts))


def product(specs: Sequence[PartitionSpec]) -> Product:
    if not specs:
        raise ValueError("product of an empty list of partitions")
    return Product(tuple(specs))


def scale(spec: PartitionSpec, s: Fraction | int | str) -> PartitionSpec:
    s = parse_scalar(s)
    if s <= 0:
        raise ValueError("scale factor must be positive")
    if s == 1:
        return spec
    return Scaled(spec, s)


def member_of(spec: PartitionSpec, x: Sequence) -> MemberId:
    return spec.member_of(make_point(x))


def corner_of(spec: PartitionSpec, member: Sequence[int]) -> Point:
    return spec.corner_of(tuple(member))


def center_of(spec: PartitionSpec, member: Sequence[int]) -> Point:
    return spec.center_of(tuple(member))


def profile_block_dims(fd: int, d: int) -> list[int]:
    """Block dimensions summing to ``d``: ``ceil(d/fd)`` blocks of size ``fd`` or ``fd - 1``.

    When that split does not exist (e.g. fd=4, d=5) the last block takes the remainder.
    """
    n = -(-d // fd)
    if n == 1:
        return [d]
    full = d - n * (fd - 1)
    if 0 <= full <= n:
        return [fd] * full + [fd - 1] * (n - full)
    return [fd] * (n - 1) + [d - (n - 1) * fd]


def build_profile(f: Callable[[int], int], d: int) -> tuple[PartitionSpec, SecludedClaim]:
    """Product of layered blocks of dimension ``f(d)`` with its (k, epsilon) claim."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    fd = int(f(d))
    if fd < 1:
        raise ValueError(f"f({d}) = {fd} must be at least 1")
    dims = profile_block_dims(fd, d)
    blocks = [layered(m) for m in dims]
    spec = blocks[0] if len(blocks) == 1 else product(blocks)
    n = -(-d // fd)
    return spec, SecludedClaim(k=(fd + 1) ** n, epsilon=Fraction(1, 2 * fd))


def spec_from_json(data: dict) -> PartitionSpec:
    kind = data.get("type")
    if kind == "grid":
        return Grid(int(data["d"]))
    if kind == "layered":
        d = int(data["d"])
        return layered(d, data.get("shifts"))
    if kind == "product":
        return product([spec_from_json(f) for f in data["factors"]])
    if kind == "scaled":
        return Scaled(spec_from_json(data["inner"]), parse_scalar(data["factor"]))
    raise ValueError(f"unknown partition type {kind!r}")
