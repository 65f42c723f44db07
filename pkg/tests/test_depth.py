from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction as F

import pytest

from secluded.depth import (
    BoxFamily,
    depth_at,
    depth_decomposition,
    harmonic_family,
    multiplicity_identity_check,
    pigeonhole_bound,
    pigeonhole_witness,
)
from secluded.geometry import AxisBox, box_volume


def random_family(rng: random.Random, d: int, n: int, den: int = 8) -> BoxFamily:
    container = AxisBox.closed([0] * d, [1] * d)
    members = []
    for _ in range(n):
        low, high, cl, ch = [], [], [], []
        for _ in range(d):
            a, b = sorted(rng.sample(range(den + 1), 2))
            low.append(F(a, den))
            high.append(F(b, den))
            cl.append(rng.random() < 0.5)
            ch.append(rng.random() < 0.5)
        members.append(AxisBox(tuple(low), tuple(high), tuple(cl), tuple(ch)))
    return BoxFamily(container, tuple(members))


def test_two_intervals():
    fam = BoxFamily(AxisBox.closed([0], [3]), (AxisBox.closed([0], [2]), AxisBox.closed([1], [3])))
    cells = depth_decomposition(fam)
    assert [(c.cell.low[0], c.cell.high[0], c.depth) for c in cells] == [(0, 1, 1), (1, 2, 2), (2, 3, 1)]
    assert cells[-1].cell.closed_high == (True,) and cells[0].cell.closed_high == (False,)
    assert multiplicity_identity_check(fam) == (4, 4, True)
    p, depth = pigeonhole_witness(fam)
    assert depth == 2 and 1 < p[0] < 2 and pigeonhole_bound(fam) == 2


def test_disjoint_and_nested():
    disjoint = BoxFamily(AxisBox.closed([0, 0], [2, 2]), (AxisBox.half_open([0, 0], [1, 1]), AxisBox.half_open([1, 1], [2, 2])))
    assert max(c.depth for c in depth_decomposition(disjoint)) <= 1
    nested = BoxFamily(AxisBox.closed([0, 0], [1, 1]), tuple(AxisBox.closed([F(i, 10)] * 2, [1 - F(i, 10)] * 2) for i in range(4)))
    assert pigeonhole_witness(nested)[1] == 4


def test_empty_family():
    fam = BoxFamily(AxisBox.closed([0], [1]), ())
    assert multiplicity_identity_check(fam) == (0, 0, True)
    assert pigeonhole_witness(fam)[1] == 0


def test_harmonic_three():
    fam = harmonic_family(3)
    p, depth = pigeonhole_witness(fam)
    assert depth == 3 and 0 < p[0] < F(1, 3)
    assert pigeonhole_bound(fam) == 2


@pytest.mark.parametrize("n", range(1, 13))
def test_harmonic_reaches_n(n):
    assert pigeonhole_witness(harmonic_family(n))[1] == n


def test_five_quarter_boxes():
    rng = random.Random(11)
    container = AxisBox.closed([0, 0], [1, 1])
    members = []
    for _ in range(5):
        x, y = F(rng.randint(0, 4), 8), F(rng.randint(0, 4), 8)
        members.append(AxisBox.half_open([x, y], [x + F(1, 2), y + F(1, 2)]))
    fam = BoxFamily(container, tuple(members))
    assert sum(box_volume(m) for m in members) == F(5, 4)
    assert pigeonhole_witness(fam)[1] >= 2


def test_member_outside_container_rejected():
    with pytest.raises(ValueError):
        BoxFamily(AxisBox.half_open([0], [1]), (AxisBox.closed([0], [1]),))
    with pytest.raises(ValueError):
        BoxFamily(AxisBox.closed([0], [0]), ())


@pytest.mark.parametrize("seed", range(30))
def test_random_identity_and_oracle(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 3)
    fam = random_family(rng, d, rng.randint(0, 10))
    total, integral, ok = multiplicity_identity_check(fam)
    assert ok and total == integral
    p, depth = pigeonhole_witness(fam)
    assert depth == depth_at(fam, p) >= pigeonhole_bound(fam)
    # oracle: depth at every compressed midpoint
    axes = []
    for i in range(d):
        pts = sorted({F(0), F(1)} | {m.low[i] for m in fam.members} | {m.high[i] for m in fam.members})
        axes.append([(a + b) / 2 for a, b in zip(pts, pts[1:])])
    assert depth == max(depth_at(fam, q) for q in itertools.product(*axes))


def test_cells_partition_container():
    rng = random.Random(3)
    fam = random_family(rng, 2, 6)
    cells = depth_decomposition(fam)
    assert sum(box_volume(c.cell) for c in cells) == box_volume(fam.container)
    for a, b in itertools.combinations(cells, 2):
        assert not a.cell.intersects(b.cell)
    for c in cells:
        mid = tuple((lo + hi) / 2 for lo, hi in zip(c.cell.low, c.cell.high))
        assert depth_at(fam, mid) == c.depth


def test_json_roundtrip():
    fam = random_family(random.Random(1), 3, 4)
    assert BoxFamily.from_json(fam.to_json()) == fam


def test_bound_is_ceiling():
    fam = random_family(random.Random(2), 2, 12)
    total = sum(box_volume(m) for m in fam.members)
    assert pigeonhole_bound(fam) == math.ceil(total)
