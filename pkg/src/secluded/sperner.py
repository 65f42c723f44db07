"""Neighborhood Sperner checks on exact grid colorings of the unit cube.

A :class:`GridColoring` assigns each cell ``prod [i/r, (i+1)/r)`` one color,
the last cell on every axis being closed at 1, so it is a genuine coloring
of ``[0, 1]^d`` and face contact is decidable from the boundary slabs.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import Point, make_point, parse_scalar
from .neighborhood import TheoremViolation


class InvalidColoring(ValueError):
    """A color touches two opposite faces of the cube."""

    def __init__(self, violations: Sequence[tuple[int, int]]):
        self.violations = list(violations)
        text = ", ".join(f"color {c} on axis {a}" for c, a in self.violations)
        super().__init__(f"colors touch opposite faces: {text}")


@dataclass(frozen=True)
class GridColoring:
    cells: np.ndarray
    palette: frozenset = field(default=None)

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.int64)
        if cells.ndim < 1 or 0 in cells.shape:
            raise ValueError("coloring needs at least one cell on every axis")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        present = frozenset(int(c) for c in np.unique(cells))
        palette = present if self.palette is None else frozenset(int(c) for c in self.palette)
        if palette != present:
            raise ValueError(f"palette {sorted(palette)} differs from colors used {sorted(present)}")
        object.__setattr__(self, "palette", palette)

    @property
    def d(self) -> int:
        return self.cells.ndim

    @property
    def resolution(self) -> tuple[int, ...]:
        return tuple(self.cells.shape)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "resolution": list(self.resolution),
            "cells": [int(c) for c in self.cells.ravel()],
            "palette": sorted(self.palette),
        }

    @classmethod
    def from_json(cls, data: dict) -> GridColoring:
        res = tuple(int(r) for r in data["resolution"])
        if len(res) != int(data.get("d", len(res))):
            raise ValueError("resolution length does not match d")
        cells = np.asarray(data["cells"], dtype=np.int64).reshape(res)
        return cls(cells, frozenset(data["palette"]) if "palette" in data else None)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[tuple[int, int], ...]

    @property
    def valid(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class RichPointReport:
    point: Point
    epsilon: Fraction
    colors_found: frozenset
    bound: int

    @property
    def count(self) -> int:
        return len(self.colors_found)


def validate_no_opposite_faces(c: GridColoring) -> ValidationReport:
    """List every (color, axis) whose color touches both the face x_axis=0 and x_axis=1."""
    bad = []
    for axis, r in enumerate(c.resolution):
        low = set(np.unique(c.cells.take(0, axis=axis)).tolist())
        high = set(np.unique(c.cells.take(r - 1, axis=axis)).tolist())
        bad.extend((color, axis) for color in sorted(low & high))
    return ValidationReport(tuple(sorted(bad)))


def sperner_bound(d: int, eps: Fraction) -> int:
    return math.ceil((1 + Fraction(2, 3) * eps) ** d)


def _index_range(r: int, p: Fraction, eps: Fraction) -> tuple[int, int]:
    """Cells ``i`` with ``i/r < p + eps`` and ``(i+1)/r > p - eps``, as a half-open slice."""
    hi = math.ceil(r * (p + eps)) - 1
    lo = math.floor(r * (p - eps))
    return max(lo, 0), min(hi, r - 1) + 1


def _colors_in(c: GridColoring, ranges) -> np.ndarray:
    block = c.cells[tuple(slice(lo, hi) for lo, hi in ranges)]
    return np.unique(block)


def color_count(c: GridColoring, p: Sequence, eps) -> int:
    """Distinct colors meeting the open l-infinity ball of radius ``eps`` at ``p``."""
    p = make_point(p)
    eps = parse_scalar(eps)
    if len(p) != c.d:
        raise ValueError(f"point has dimension {len(p)}, coloring has {c.d}")
    if any(x < 0 or x > 1 for x in p):
        raise ValueError("point must lie in the unit cube")
    if eps <= 0:
        return 0
    return len(_colors_in(c, [_index_range(r, x, eps) for r, x in zip(c.resolution, p)]))


def _axis_candidates(r: int, eps: Fraction) -> list[tuple[Fraction, tuple[int, int]]]:
    """Least coordinate in [0, 1] for each distinct cell range the ball can cover on one axis."""
    crit = {Fraction(0), Fraction(1)}
    for i in range(r + 1):
        for v in (Fraction(i, r) - eps, Fraction(i, r) + eps):
            if 0 <= v <= 1:
                crit.add(v)
    crit = sorted(crit)
    values = crit + [(a + b) / 2 for a, b in zip(crit, crit[1:])]
    seen: dict[tuple[int, int], Fraction] = {}
    for v in sorted(values):
        seen.setdefault(_index_range(r, v, eps), v)
    return sorted((v, rng) for rng, v in seen.items())


def find_rich_point(c: GridColoring, eps, check: bool = True) -> RichPointReport:
    """Point of [0,1]^d whose open ``eps``-ball sees the most colors (lexicographically least such point)."""
    eps = parse_scalar(eps)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2]")
    report = validate_no_opposite_faces(c)
    if not report.valid:
        raise InvalidColoring(report.violations)
    per_axis = [_axis_candidates(r, eps) for r in c.resolution]
    best_count, best_point, best_colors = -1, None, None
    for combo in itertools.product(*per_axis):
        colors = _colors_in(c, [rng for _, rng in combo])
        if len(colors) > best_count:
            best_count = len(colors)
            best_point = tuple(v for v, _ in combo)
            best_colors = frozenset(int(x) for x in colors)
    bound = sperner_bound(c.d, eps)
    if check and best_count < bound:
        raise TheoremViolation(f"best ball sees {best_count} colors, guarantee is {bound}")
    return RichPointReport(best_point, eps, best_colors, bound)


def orthant_coloring(d: int, resolution: int = 2) -> GridColoring:
    """One color per corner: cell color is the bit pattern of which half it sits in."""
    if resolution < 2 or resolution % 2:
        raise ValueError("resolution must be an even number >= 2")
    half = resolution // 2
    cells = np.zeros((resolution,) * d, dtype=np.int64)
    for ix in np.ndindex(cells.shape):
        cells[ix] = sum(1 << a for a, i in enumerate(ix) if i >= half)
    return GridColoring(cells)


def constant_coloring(d: int, resolution: int = 2) -> GridColoring:
    return GridColoring(np.zeros((resolution,) * d, dtype=np.int64))


def stripe_coloring(resolution: int = 2) -> GridColoring:
    """Two colors split along x_1; each stripe spans the full x_2 range."""
    cells = np.zeros((resolution, resolution), dtype=np.int64)
    cells[resolution // 2:, :] = 1
    return GridColoring(cells)


def random_valid_coloring(rng: random.Random, d: int = 2, max_resolution: int = 16, mutations: int = 60) -> GridColoring:
    """Random coloring with no color on opposite faces.

    Starts from a corner coloring with random split positions, then recolors
    random cells (sometimes with fresh colors), keeping only valid moves.
    """
    res = tuple(rng.randint(2, max_resolution) for _ in range(d))
    splits = [rng.randint(1, r - 1) for r in res]
    cells = np.zeros(res, dtype=np.int64)
    for ix in np.ndindex(res):
        cells[ix] = sum(1 << a for a, i in enumerate(ix) if i >= splits[a])
    next_color = 1 << d
    for _ in range(mutations):
        ix = tuple(rng.randrange(r) for r in res)
        if rng.random() < 0.3:
            color, next_color = next_color, next_color + 1
        else:
            color = int(cells[tuple(rng.randrange(r) for r in res)])
        old = cells[ix]
        cells[ix] = color
        if not validate_no_opposite_faces(GridColoring(cells.copy())).valid:
            cells[ix] = old
    return GridColoring(cells)
