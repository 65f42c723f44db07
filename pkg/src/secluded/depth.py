"""Depth of a finite family of axis-aligned boxes inside a container box.

Coordinates are compressed per axis into the sorted distinct endpoints; each
product of consecutive endpoint intervals is a cell on which the depth (the
number of members covering the cell's interior) is constant.  Counts are kept
in a numpy integer grid, volumes stay exact.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import AxisBox, Point, box_volume
from .neighborhood import TheoremViolation


@dataclass(frozen=True)
class BoxFamily:
    container: AxisBox
    members: tuple[AxisBox, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if box_volume(self.container) <= 0:
            raise ValueError("container must have positive volume")
        for i, m in enumerate(self.members):
            if m.dim != self.container.dim:
                raise ValueError(f"member {i} has dimension {m.dim}, container has {self.container.dim}")
            if not m.is_subset_of(self.container):
                raise ValueError(f"member {i} is not inside the container")

    @property
    def dim(self) -> int:
        return self.container.dim

    def to_json(self) -> dict:
        return {"container": self.container.to_json(), "members": [m.to_json() for m in self.members]}

    @classmethod
    def from_json(cls, data: dict) -> BoxFamily:
        return cls(AxisBox.from_json(data["container"]), tuple(AxisBox.from_json(m) for m in data["members"]))


@dataclass(frozen=True)
class DepthCell:
    cell: AxisBox
    depth: int


class _DepthGrid:
    def __init__(self, fam: BoxFamily):
        self.fam = fam
        c = fam.container
        self.breaks = []
        for i in range(fam.dim):
            pts = {c.low[i], c.high[i]}
            for m in fam.members:
                pts.add(m.low[i])
                pts.add(m.high[i])
            self.breaks.append(sorted(pts))
        shape = tuple(len(b) - 1 for b in self.breaks)
        self.depth = np.zeros(shape, dtype=np.int64)
        for m in fam.members:
            idx = []
            for i in range(fam.dim):
                lo = bisect.bisect_left(self.breaks[i], m.low[i])
                hi = bisect.bisect_left(self.breaks[i], m.high[i])
                idx.append(slice(lo, hi))
            self.depth[tuple(idx)] += 1

    def widths(self, axis: int) -> list[Fraction]:
        b = self.breaks[axis]
        return [hi - lo for lo, hi in zip(b, b[1:])]

    def cell(self, index: Sequence[int]) -> AxisBox:
        c = self.fam.container
        low, high, cl, ch = [], [], [], []
        for i, j in enumerate(index):
            b = self.breaks[i]
            low.append(b[j])
            high.append(b[j + 1])
            cl.append(c.closed_low[i] if j == 0 else True)
            ch.append(c.closed_high[i] if j == len(b) - 2 else False)
        return AxisBox(tuple(low), tuple(high), tuple(cl), tuple(ch))

    def integral(self) -> Fraction:
        """Exact sum over cells of depth times cell volume, contracted one axis at a time."""
        acc = self.depth.astype(object)
        scale = 1
        for axis in reversed(range(self.fam.dim)):
            w = self.widths(axis)
            den = math.lcm(*(x.denominator for x in w))
            ints = np.array([x.numerator * (den // x.denominator) for x in w], dtype=object)
            acc = np.tensordot(acc, ints, axes=([axis], [0]))
            scale *= den
        return Fraction(int(acc), scale)


def depth_decomposition(fam: BoxFamily) -> list[DepthCell]:
    """Cells partitioning the container, each with its constant depth, in lexicographic order."""
    grid = _DepthGrid(fam)
    return [DepthCell(grid.cell(ix), int(grid.depth[ix])) for ix in np.ndindex(grid.depth.shape)]


def multiplicity_identity_check(fam: BoxFamily) -> tuple[Fraction, Fraction, bool]:
    """Sum of member volumes against the integral of depth; the two must agree."""
    total = sum((box_volume(m) for m in fam.members), Fraction(0))
    integral = _DepthGrid(fam).integral() if fam.members else Fraction(0)
    return total, integral, total == integral


def depth_at(fam: BoxFamily, p: Sequence[Fraction]) -> int:
    """Number of members containing ``p``, honoring every closure flag."""
    return sum(1 for m in fam.members if m.contains(p))


def pigeonhole_bound(fam: BoxFamily) -> int:
    total = sum((box_volume(m) for m in fam.members), Fraction(0))
    return math.ceil(total / box_volume(fam.container))


def pigeonhole_witness(fam: BoxFamily) -> tuple[Point, int]:
    """Midpoint of the lexicographically first deepest cell, with its depth.

    The depth is at least ``ceil(sum of member volumes / container volume)``.
    """
    if not fam.members:
        c = fam.container
        return tuple((lo + hi) / 2 for lo, hi in zip(c.low, c.high)), 0
    grid = _DepthGrid(fam)
    flat = int(np.argmax(grid.depth))
    index = np.unravel_index(flat, grid.depth.shape)
    cell = grid.cell(index)
    point = tuple((lo + hi) / 2 for lo, hi in zip(cell.low, cell.high))
    depth = depth_at(fam, point)
    bound = pigeonhole_bound(fam)
    if depth < bound:
        raise TheoremViolation(f"deepest point has depth {depth}, pigeonhole guarantees {bound}")
    return point, depth


def harmonic_family(n: int) -> BoxFamily:
    """Open intervals (0, 1/i) for i = 1..n inside (0, 1)."""
    members = tuple(AxisBox.open([0], [Fraction(1, i)]) for i in range(1, n + 1))
    return BoxFamily(AxisBox.open([0], [1]), members)
